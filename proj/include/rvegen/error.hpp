#pragma once

#include <stdexcept>
#include <string>

namespace rvegen {

enum class ErrorCode {
  InvalidArgument,
  EmptyCell,
  DegeneratePair,
  DistantImage,
  InfeasibleInitialGuess,
  LineSearchFailed,
  MaxIterationsExceeded,
  SingularReducedHessian,
  SeedSampling,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rvegen
