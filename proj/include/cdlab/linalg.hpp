#pragma once

#include "cdlab/algebra.hpp"

namespace cdlab::linalg {

/// Matrix exponential by Pade scaling and squaring (orders 3..13).
Matrix expm(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

inline Matrix hermitian_part(const Matrix& a) { return (a + a.adjoint()) / 2.0; }

/// Column-stacked vec(m) and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int rows, int cols);

}  // namespace cdlab::linalg
