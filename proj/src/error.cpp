#include "diffuscope/error.hpp"

namespace diffuscope {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::EmptySupport: return "EmptySupport";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::ZeroTotal: return "ZeroTotal";
    case Errc::NegativeCount: return "NegativeCount";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidScale: return "InvalidScale";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegenerateBox: return "DegenerateBox";
    case Errc::NonFiniteIterate: return "NonFiniteIterate";
    case Errc::InvalidNetwork: return "InvalidNetwork";
    case Errc::EigenSolverFailure: return "EigenSolverFailure";
    case Errc::DisconnectedNetwork: return "DisconnectedNetwork";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::SolverFailure: return "SolverFailure";
    case Errc::InvalidTable: return "InvalidTable";
    case Errc::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case Errc::DegenerateSeparation: return "DegenerateSeparation";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_numeric_failure(Errc code) {
  switch (code) {
    case Errc::NonFiniteIterate:
    case Errc::EigenSolverFailure:
    case Errc::SolverFailure:
    case Errc::DegenerateSeparation:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace diffuscope
