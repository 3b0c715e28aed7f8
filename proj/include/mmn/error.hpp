#pragma once

#include <stdexcept>
#include <string>

namespace mmn {

enum class ErrorKind {
  NotPositiveDefinite,
  SkewnessOutOfRange,
  DimensionMismatch,
  RankDeficient,
  RootNotBracketed,
  DomainError,
  UnsupportedOrder,
  QuadratureNotConverged,
  UnsupportedLaw,
  DegenerateSkewness,
  FlagMismatch,
  DegenerateWeights,
  NotConverged,
  DegenerateData,
  StudyUnstable,
  EigenFailure,
  InvalidInput,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mmn
