#include "cdlab/error.hpp"

namespace cdlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::AlgebraMismatch: return "algebra mismatch";
    case ErrorCode::NotHermitian: return "not hermitian";
    case ErrorCode::CapExceeded: return "dimension cap exceeded";
    case ErrorCode::HypothesisViolation: return "hypothesis violation";
    case ErrorCode::ResolventDoesNotExist: return "resolvent does not exist";
    case ErrorCode::UnsupportedStructure: return "unsupported structure";
    case ErrorCode::RankAmbiguity: return "rank ambiguity";
    case ErrorCode::NotImplementable: return "not implementable";
    case ErrorCode::Schema: return "schema violation";
  }
  return "unknown";
}

}  // namespace cdlab
