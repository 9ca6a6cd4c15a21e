#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optomech {

enum class ErrorKind {
  InvalidParams,
  SingularDenominator,
  EigendecompositionFailure,
  UnstableSystem,
  NoConvergence,
  UnphysicalCovariance,
  NoCrossing,
  UnknownPreset,
  InvalidSpec,
  ConfigParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::EigendecompositionFailure: return "EigendecompositionFailure";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UnphysicalCovariance: return "UnphysicalCovariance";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ConfigParseError: return "ConfigParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Configuration problems map to CLI exit status 2, everything else to 3.
constexpr bool is_config_error(ErrorKind kind) {
  return kind == ErrorKind::ConfigParseError || kind == ErrorKind::UnknownPreset ||
         kind == ErrorKind::InvalidSpec || kind == ErrorKind::IoError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace optomech
