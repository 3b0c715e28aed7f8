#include "mmn/error.hpp"

namespace mmn {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SkewnessOutOfRange: return "SkewnessOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::UnsupportedLaw: return "UnsupportedLaw";
    case ErrorKind::DegenerateSkewness: return "DegenerateSkewness";
    case ErrorKind::FlagMismatch: return "FlagMismatch";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::StudyUnstable: return "StudyUnstable";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace mmn
