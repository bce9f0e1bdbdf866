#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace infercost {

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { Table, Json, Delimited };

OutputFormat parse_output_format(const std::string& text);

/// table: aligned text, numerics right-aligned at 4 significant digits.
/// json: {"<name>": [{column: value}, ...], ...} at full precision.
/// delimited: comma-separated with a header per table at full precision;
/// tables after the first are preceded by a blank line and `# <name>`.
void render(std::ostream& out, std::span<const Table> tables, OutputFormat format);

}  // namespace infercost
