#include "infercost/error.hpp"

namespace infercost {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ZeroColumn: return "ZeroColumn";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::ModelOutOfRange: return "ModelOutOfRange";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::BadEdges: return "BadEdges";
    case Errc::MissingKind: return "MissingKind";
    case Errc::Parse: return "Parse";
    case Errc::Overflow: return "Overflow";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace infercost
