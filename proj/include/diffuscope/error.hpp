#pragma once

#include <stdexcept>
#include <string>

namespace diffuscope {

enum class Errc {
  EmptySupport,
  DimensionMismatch,
  NonFinite,
  NotNormalized,
  IndexOutOfRange,
  ZeroTotal,
  NegativeCount,
  LengthMismatch,
  InvalidScale,
  InvalidArgument,
  DegenerateBox,
  NonFiniteIterate,
  InvalidNetwork,
  EigenSolverFailure,
  DisconnectedNetwork,
  InvalidOrder,
  SolverFailure,
  InvalidTable,
  ZeroVarianceColumn,
  DegenerateSeparation,
  EmptyClass,
  Parse,
  Io,
};

const char* to_string(Errc code);

/// True for errors caused by numerical breakdown rather than bad input.
bool is_numeric_failure(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace diffuscope
