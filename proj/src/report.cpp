#include "infercost/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "infercost/error.hpp"

namespace infercost {
namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string full_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool numeric(const Cell& c) { return !std::holds_alternative<std::string>(c); }

std::string text(const Cell& c, bool full) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return full ? full_number(std::get<double>(c)) : short_number(std::get<double>(c));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  return out + "\"";
}

void render_text(std::ostream& out, const Table& t, bool titled) {
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t j = 0; j < t.columns.size(); ++j) width[j] = t.columns[j].size();
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], text(row[j], false).size());
  }
  if (titled) out << "== " << t.name << " ==\n";
  auto pad = [&](const std::string& s, std::size_t w, bool right) {
    const std::string fill(w - s.size(), ' ');
    out << (right ? fill + s : s + fill);
  };
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out << "  ";
    const bool right = !t.rows.empty() && numeric(t.rows.front()[j]);
    pad(t.columns[j], width[j], right);
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << "  ";
      pad(text(row[j], false), width[j], numeric(row[j]));
    }
    out << '\n';
  }
}

}  // namespace

OutputFormat parse_output_format(const std::string& text) {
  if (text == "table") return OutputFormat::Table;
  if (text == "json") return OutputFormat::Json;
  if (text == "delimited" || text == "csv") return OutputFormat::Delimited;
  throw Error(Errc::UnknownFormat, "unknown output format '" + text + "'");
}

void render(std::ostream& out, std::span<const Table> tables, OutputFormat format) {
  switch (format) {
    case OutputFormat::Table:
      for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) out << '\n';
        render_text(out, tables[i], tables.size() > 1);
      }
      break;
    case OutputFormat::Json: {
      nlohmann::ordered_json doc = nlohmann::ordered_json::object();
      for (const auto& t : tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
          nlohmann::ordered_json obj = nlohmann::ordered_json::object();
          for (std::size_t j = 0; j < row.size(); ++j) {
            std::visit([&](const auto& v) { obj[t.columns[j]] = v; }, row[j]);
          }
          rows.push_back(std::move(obj));
        }
        doc[t.name] = std::move(rows);
      }
      out << doc.dump(2) << '\n';
      break;
    }
    case OutputFormat::Delimited:
      for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) out << "\n# " << tables[i].name << '\n';
        for (std::size_t j = 0; j < tables[i].columns.size(); ++j) {
          out << (j ? "," : "") << csv_escape(tables[i].columns[j]);
        }
        out << '\n';
        for (const auto& row : tables[i].rows) {
          for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << csv_escape(text(row[j], true));
          out << '\n';
        }
      }
      break;
  }
}

}  // namespace infercost
