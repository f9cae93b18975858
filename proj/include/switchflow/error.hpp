#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchflow {

enum class ErrorKind {
  NonConvergence,
  PointOutsideSet,
  NoProxOracle,
  LayoutMismatch,
  OracleUnavailable,
  InitialConditionOutsideSet,
  GridMismatch,
  AnchorNotInA,
  AnchorNotInAq,
  AnchorNotZero,
  ConfigInvalid,
  UnknownPreset,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; the kind is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace switchflow
