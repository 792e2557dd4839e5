#include "sdmapkit/error.hpp"

namespace sdmapkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::DanglingNodeRef: return "DanglingNodeRef";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSquareAdjacency: return "NonSquareAdjacency";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegeneratePolyline: return "DegeneratePolyline";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TooManyChannels: return "TooManyChannels";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace sdmapkit
