#pragma once

#include <stdexcept>
#include <string>

namespace infercost {

enum class Errc {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  RankDeficient,
  ZeroColumn,
  InsufficientSamples,
  ModelOutOfRange,
  UnknownFormat,
  EmptyInput,
  EmptySelection,
  BadEdges,
  MissingKind,
  Parse,
  Overflow,
  Io,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace infercost
