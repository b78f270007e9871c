#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace texfair {

enum class ErrorCode {
  DepthNonPositive,
  DegenerateProjection,
  InsufficientViews,
  KTooLarge,
  MaskMismatch,
  NonPositiveSigma,
  EmptyResiduals,
  NoObservations,
  InvalidMesh,
  InvalidInput,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace texfair
