#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace infercost {

/// Flat `key = value` configuration text. Blank lines and `#` comments are
/// ignored; keys must be unique. Used for hardware profiles, model specs,
/// coefficient sets and trace schema maps.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(std::istream& in, std::string source = "<stream>");
  static KeyValueFile parse_text(std::string_view text, std::string source = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  std::optional<std::string> text_or(std::string_view key) const;
  double number(std::string_view key) const;
  std::optional<double> number_or(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::optional<std::int64_t> integer_or(std::string_view key) const;
  bool boolean_or(std::string_view key, bool fallback) const;

  /// Throws Errc::Parse naming the first key not in `known`.
  void reject_unknown(const std::vector<std::string_view>& known) const;

  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

 private:
  const Entry& entry(std::string_view key) const;

  std::map<std::string, Entry, std::less<>> entries_;
  std::string source_;
};

/// Full-precision scientific notation, round-trips through `number()`.
std::string format_scientific(double value);

}  // namespace infercost
