#include "infercost/kv_config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "infercost/error.hpp"

namespace infercost {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, std::string source) {
  KeyValueFile file;
  file.source_ = std::move(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::Parse, file.source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(Errc::Parse, file.source_ + ":" + std::to_string(line_no) + ": empty key");
    }
    auto [it, inserted] = file.entries_.emplace(std::string(key), Entry{std::string(value), line_no});
    if (!inserted) {
      throw Error(Errc::Parse, file.source_ + ":" + std::to_string(line_no) + ": duplicate key '" +
                                   std::string(key) + "' (first on line " + std::to_string(it->second.line) + ")");
    }
  }
  return file;
}

KeyValueFile KeyValueFile::parse_text(std::string_view text, std::string source) {
  std::istringstream in{std::string(text)};
  return parse(in, std::move(source));
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return parse(in, path.string());
}

bool KeyValueFile::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const KeyValueFile::Entry& KeyValueFile::entry(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::Parse, source_ + ": missing key '" + std::string(key) + "'");
  return it->second;
}

const std::string& KeyValueFile::text(std::string_view key) const { return entry(key).value; }

std::optional<std::string> KeyValueFile::text_or(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return text(key);
}

double KeyValueFile::number(std::string_view key) const {
  const auto& e = entry(key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw Error(Errc::Parse, source_ + ":" + std::to_string(e.line) + ": '" + std::string(key) +
                                 "' is not a finite number: '" + e.value + "'");
  }
  return v;
}

std::optional<double> KeyValueFile::number_or(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::int64_t KeyValueFile::integer(std::string_view key) const {
  const auto& e = entry(key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw Error(Errc::Parse, source_ + ":" + std::to_string(e.line) + ": '" + std::string(key) +
                                 "' is not an integer: '" + e.value + "'");
  }
  return v;
}

std::optional<std::int64_t> KeyValueFile::integer_or(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return integer(key);
}

bool KeyValueFile::boolean_or(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& e = entry(key);
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw Error(Errc::Parse, source_ + ":" + std::to_string(e.line) + ": '" + std::string(key) +
                               "' is not a boolean: '" + e.value + "'");
}

void KeyValueFile::reject_unknown(const std::vector<std::string_view>& known) const {
  for (const auto& [key, e] : entries_) {
    if (std::find(known.begin(), known.end(), std::string_view(key)) == known.end()) {
      throw Error(Errc::Parse, source_ + ":" + std::to_string(e.line) + ": unknown key '" + key + "'");
    }
  }
}

std::string format_scientific(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

}  // namespace infercost
