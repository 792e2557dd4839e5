#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdmapkit {

enum class ErrorCode {
  InvalidCoordinate,
  InvalidArgument,
  EmptyInput,
  MalformedXml,
  DanglingNodeRef,
  InvalidDensity,
  DimensionMismatch,
  NonSquareAdjacency,
  LengthMismatch,
  DegeneratePolyline,
  EmptySet,
  OutOfRange,
  TooManyChannels,
  SchemaError,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sdmapkit
