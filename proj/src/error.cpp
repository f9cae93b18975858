#include "switchflow/error.hpp"

namespace switchflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::PointOutsideSet: return "PointOutsideSet";
    case ErrorKind::NoProxOracle: return "NoProxOracle";
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::OracleUnavailable: return "OracleUnavailable";
    case ErrorKind::InitialConditionOutsideSet: return "InitialConditionOutsideSet";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::AnchorNotInA: return "AnchorNotInA";
    case ErrorKind::AnchorNotInAq: return "AnchorNotInAq";
    case ErrorKind::AnchorNotZero: return "AnchorNotZero";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace switchflow
