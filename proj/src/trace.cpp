#include "infercost/trace.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "infercost/error.hpp"
#include "infercost/kv_config.hpp"

namespace infercost {
namespace {

using json = nlohmann::json;

constexpr std::array<const char*, 11> kFields = {"prompt_id", "run_kind",  "input_tokens", "output_tokens",
                                                 "latency_s", "gpu_wh",    "cpu_wh",       "ram_wh",
                                                 "model_id",  "precision", "batch"};
constexpr std::size_t kRequiredFields = 8;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool blank(std::string_view s) { return trim(s).empty(); }

// Comma-separated with optional double quotes ("" escapes a quote).
std::vector<std::string> split_delimited(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw Error(Errc::Parse, "unterminated quote");
  out.emplace_back(trim(field));
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_number(const std::string& field, const char* name) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw Error(Errc::Parse, std::string(name) + ": not a finite number: '" + field + "'");
  }
  return v;
}

std::int64_t to_integer(const std::string& field, const char* name) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw Error(Errc::Parse, std::string(name) + ": not an integer: '" + field + "'");
  }
  return v;
}

std::string canonical(const std::string& name, const IngestOptions& options) {
  const auto it = options.schema.find(name);
  return it == options.schema.end() ? name : it->second;
}

// Builds a record from field-name -> text lookups.
template <typename Lookup>
RunRecord build_record(Lookup&& field) {
  RunRecord r;
  r.prompt_id = field("prompt_id").value();
  r.run_kind = parse_run_kind(field("run_kind").value());
  r.input_tokens = to_integer(field("input_tokens").value(), "input_tokens");
  r.output_tokens = to_integer(field("output_tokens").value(), "output_tokens");
  r.latency_s = to_number(field("latency_s").value(), "latency_s");
  r.energy_wh << to_number(field("gpu_wh").value(), "gpu_wh"), to_number(field("cpu_wh").value(), "cpu_wh"),
      to_number(field("ram_wh").value(), "ram_wh");
  r.model_id = field("model_id").value_or("");
  r.precision = field("precision").value_or("");
  if (auto b = field("batch"); b && !b->empty()) r.batch = to_integer(*b, "batch");
  validate(r);
  return r;
}

std::vector<RunRecord> drop_leading(std::vector<RunRecord> records, std::size_t k) {
  if (k == 0) return records;
  std::map<std::pair<std::string, RunKind>, std::size_t> seen;
  std::vector<RunRecord> kept;
  for (auto& r : records) {
    if (seen[{r.prompt_id, r.run_kind}]++ >= k) kept.push_back(std::move(r));
  }
  return kept;
}

ParseResult parse_delimited(std::istream& in, const IngestOptions& options) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) {
      for (auto& h : split_delimited(line)) header.push_back(canonical(h, options));
      break;
    }
  }
  if (header.empty()) throw Error(Errc::EmptyInput, "trace has no header row");
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);
  for (std::size_t f = 0; f < kRequiredFields; ++f) {
    if (!column.count(kFields[f])) {
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": header lacks column '" + kFields[f] + "'");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      const auto cells = split_delimited(line);
      if (cells.size() != header.size()) {
        throw Error(Errc::Parse, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(cells.size()));
      }
      result.records.push_back(build_record([&](const char* name) -> std::optional<std::string> {
        const auto it = column.find(name);
        if (it == column.end()) return std::nullopt;
        return cells[it->second];
      }));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

ParseResult parse_line_json(std::istream& in, const IngestOptions& options) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    any = true;
    try {
      const json raw = json::parse(line);
      if (!raw.is_object()) throw Error(Errc::Parse, "line is not a JSON object");
      json obj = json::object();
      for (const auto& [key, value] : raw.items()) obj[canonical(key, options)] = value;
      result.records.push_back(build_record([&](const char* name) -> std::optional<std::string> {
        const auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
        if (it->is_number()) return full_precision(it->get<double>());
        throw Error(Errc::Parse, std::string(name) + ": unsupported JSON type");
      }));
    } catch (const json::exception& e) {
      result.errors.push_back({line_no, std::string("Parse: ") + e.what()});
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  if (!any) throw Error(Errc::EmptyInput, "trace has no records");
  return result;
}

ComponentStats stats_of(std::span<const double> values) {
  ComponentStats s;
  s.count = values.size();
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  s.mean = v.mean();
  s.std = std::sqrt((v - s.mean).square().mean());
  s.min = v.minCoeff();
  s.max = v.maxCoeff();
  return s;
}

template <typename Select>
EnergyStats aggregate_with(EnergyPhase phase, Select&& select) {
  EnergyStats out;
  out.phase = phase;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto values = select(static_cast<Component>(c));
    if (values.empty()) throw Error(Errc::EmptySelection, std::string("no ") + to_string(phase) + " energies selected");
    out.components[c] = stats_of(values);
  }
  out.total_mean = out.components[0].mean + out.components[1].mean + out.components[2].mean;
  return out;
}

double median_of(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

void summarize(Histogram& h, std::span<const double> values) {
  h.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  h.median = median_of(values);
  h.right_skewed = h.mean > h.median;
}

void require_values(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "histogram needs at least one value");
  for (double v : values) require(std::isfinite(v), "histogram values must be finite");
}

}  // namespace

const char* to_string(RunKind kind) noexcept { return kind == RunKind::PrefillOnly ? "prefill_only" : "full"; }

const char* to_string(Component c) noexcept {
  switch (c) {
    case Component::Gpu: return "gpu";
    case Component::Cpu: return "cpu";
    case Component::Ram: return "ram";
  }
  return "?";
}

RunKind parse_run_kind(const std::string& text) {
  if (text == "prefill_only" || text == "prefill") return RunKind::PrefillOnly;
  if (text == "full") return RunKind::Full;
  throw Error(Errc::Parse, "run_kind must be 'prefill_only' or 'full', got '" + text + "'");
}

Component parse_component(const std::string& text) {
  if (text == "gpu") return Component::Gpu;
  if (text == "cpu") return Component::Cpu;
  if (text == "ram") return Component::Ram;
  throw Error(Errc::InvalidArgument, "component must be gpu, cpu or ram, got '" + text + "'");
}

void validate(const RunRecord& r) {
  require(!r.prompt_id.empty(), "prompt_id is empty");
  require(r.input_tokens >= 1, "input_tokens must be >= 1");
  require(r.output_tokens >= 1, "output_tokens must be >= 1");
  require(r.run_kind != RunKind::PrefillOnly || r.output_tokens == 1, "prefill_only runs must emit exactly 1 token");
  require(std::isfinite(r.latency_s) && r.latency_s > 0.0, "latency_s must be > 0");
  require(r.energy_wh.allFinite() && (r.energy_wh >= 0.0).all(), "energies must be finite and >= 0");
  require(r.batch >= 1, "batch must be >= 1");
}

TraceFormat parse_trace_format(const std::string& text) {
  if (text == "delimited" || text == "csv") return TraceFormat::Delimited;
  if (text == "line-json" || text == "jsonl" || text == "ndjson") return TraceFormat::LineJson;
  throw Error(Errc::UnknownFormat, "unknown trace format '" + text + "'");
}

ParseResult parse_records(std::istream& in, TraceFormat format, const IngestOptions& options) {
  if (!in) throw Error(Errc::Io, "trace stream is not readable");
  ParseResult result = format == TraceFormat::Delimited ? parse_delimited(in, options) : parse_line_json(in, options);
  result.records = drop_leading(std::move(result.records), options.drop_first);
  return result;
}

void write_records(std::ostream& out, std::span<const RunRecord> records, TraceFormat format) {
  if (format == TraceFormat::Delimited) {
    for (std::size_t i = 0; i < kFields.size(); ++i) out << (i ? "," : "") << kFields[i];
    out << '\n';
    for (const auto& r : records) {
      out << quote_if_needed(r.prompt_id) << ',' << to_string(r.run_kind) << ',' << r.input_tokens << ','
          << r.output_tokens << ',' << full_precision(r.latency_s) << ',' << full_precision(r.gpu_wh()) << ','
          << full_precision(r.cpu_wh()) << ',' << full_precision(r.ram_wh()) << ',' << quote_if_needed(r.model_id)
          << ',' << quote_if_needed(r.precision) << ',' << r.batch << '\n';
    }
    return;
  }
  for (const auto& r : records) {
    json obj = {{"prompt_id", r.prompt_id},   {"run_kind", to_string(r.run_kind)},
                {"input_tokens", r.input_tokens}, {"output_tokens", r.output_tokens},
                {"latency_s", r.latency_s},   {"gpu_wh", r.gpu_wh()},
                {"cpu_wh", r.cpu_wh()},       {"ram_wh", r.ram_wh()},
                {"model_id", r.model_id},     {"precision", r.precision},
                {"batch", r.batch}};
    out << obj.dump() << '\n';
  }
}

std::map<std::string, std::string> load_schema_map(const std::string& path) {
  const auto file = KeyValueFile::load(path);
  std::map<std::string, std::string> schema;
  for (const auto& [external, entry] : file.entries()) {
    if (std::find(kFields.begin(), kFields.end(), entry.value) == kFields.end()) {
      throw Error(Errc::Parse, path + ":" + std::to_string(entry.line) + ": '" + entry.value +
                                   "' is not a trace field");
    }
    schema.emplace(external, entry.value);
  }
  return schema;
}

DecompositionResult decompose(std::span<const RunRecord> records) {
  struct Group {
    std::string id;
    ComponentWh prefill_sum = ComponentWh::Zero();
    ComponentWh full_sum = ComponentWh::Zero();
    double prefill_latency = 0.0;
    double full_latency = 0.0;
    double input_tokens = 0.0;
    double output_tokens = 0.0;
    std::size_t n_prefill = 0;
    std::size_t n_full = 0;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.prompt_id, groups.size());
    if (inserted) groups.push_back(Group{r.prompt_id});
    auto& g = groups[it->second];
    g.input_tokens += static_cast<double>(r.input_tokens);
    if (r.run_kind == RunKind::PrefillOnly) {
      g.prefill_sum += r.energy_wh;
      g.prefill_latency += r.latency_s;
      ++g.n_prefill;
    } else {
      g.full_sum += r.energy_wh;
      g.full_latency += r.latency_s;
      g.output_tokens += static_cast<double>(r.output_tokens);
      ++g.n_full;
    }
  }

  DecompositionResult out;
  for (const auto& g : groups) {
    if (g.n_prefill == 0 || g.n_full == 0) {
      out.missing.push_back({g.id, g.n_prefill == 0 ? RunKind::PrefillOnly : RunKind::Full});
      continue;
    }
    PromptDecomposition d;
    d.prompt_id = g.id;
    d.n_prefill_runs = g.n_prefill;
    d.n_full_runs = g.n_full;
    const double np = static_cast<double>(g.n_prefill);
    const double nf = static_cast<double>(g.n_full);
    d.input_tokens = g.input_tokens / (np + nf);
    d.output_tokens = g.output_tokens / nf;
    d.prefill_mean_wh = g.prefill_sum / np;
    d.full_mean_wh = g.full_sum / nf;
    d.decode_wh = d.full_mean_wh - d.prefill_mean_wh;
    d.prefill_latency_s = g.prefill_latency / np;
    d.full_latency_s = g.full_latency / nf;
    d.decode_latency_s = d.full_latency_s - d.prefill_latency_s;
    d.negative_decode = (d.decode_wh < 0.0).any();
    out.prompts.push_back(std::move(d));
  }
  return out;
}

const char* to_string(EnergyPhase phase) noexcept {
  switch (phase) {
    case EnergyPhase::Prefill: return "prefill";
    case EnergyPhase::Decode: return "decode";
    case EnergyPhase::Full: return "full";
  }
  return "?";
}

EnergyPhase parse_energy_phase(const std::string& text) {
  if (text == "prefill") return EnergyPhase::Prefill;
  if (text == "decode") return EnergyPhase::Decode;
  if (text == "full") return EnergyPhase::Full;
  throw Error(Errc::InvalidArgument, "phase must be prefill, decode or full, got '" + text + "'");
}

std::vector<double> select_energies(std::span<const RunRecord> records, EnergyPhase phase, Component component) {
  require(phase != EnergyPhase::Decode, "decode energies need decomposed prompts, not raw runs");
  const RunKind kind = phase == EnergyPhase::Prefill ? RunKind::PrefillOnly : RunKind::Full;
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.run_kind == kind) out.push_back(r.energy_wh[static_cast<Eigen::Index>(component)]);
  }
  return out;
}

std::vector<double> select_energies(std::span<const PromptDecomposition> prompts, EnergyPhase phase,
                                    Component component) {
  const auto c = static_cast<Eigen::Index>(component);
  std::vector<double> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) {
    switch (phase) {
      case EnergyPhase::Prefill: out.push_back(p.prefill_mean_wh[c]); break;
      case EnergyPhase::Decode: out.push_back(p.decode_wh[c]); break;
      case EnergyPhase::Full: out.push_back(p.full_mean_wh[c]); break;
    }
  }
  return out;
}

EnergyStats aggregate(std::span<const RunRecord> records, EnergyPhase phase) {
  return aggregate_with(phase, [&](Component c) { return select_energies(records, phase, c); });
}

EnergyStats aggregate(std::span<const PromptDecomposition> prompts, EnergyPhase phase) {
  return aggregate_with(phase, [&](Component c) { return select_energies(prompts, phase, c); });
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  require_values(values);
  require(bins >= 1, "histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto bin = static_cast<std::size_t>(std::floor((v - lo) / width));
    ++h.counts[std::min(bin, bins - 1)];
  }
  summarize(h, values);
  return h;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  require_values(values);
  if (edges.size() < 2) throw Error(Errc::BadEdges, "need at least two edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i]) || (i > 0 && !(edges[i] > edges[i - 1]))) {
      throw Error(Errc::BadEdges, "edges must be finite and strictly increasing");
    }
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front()) {
      ++h.underflow;
    } else if (v > edges.back()) {
      ++h.overflow;
    } else if (v == edges.back()) {
      ++h.counts.back();
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    }
  }
  summarize(h, values);
  return h;
}

void write_histogram(std::ostream& out, const Histogram& hist) {
  out << "bin_left_edge,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << full_precision(hist.edges[i]) << ',' << hist.counts[i] << '\n';
  }
}

std::vector<LatencySample> to_fit_samples(std::span<const RunRecord> records, Component component) {
  std::vector<LatencySample> out;
  out.reserve(records.size());
  const auto c = static_cast<Eigen::Index>(component);
  for (const auto& r : records) {
    const double g = r.run_kind == RunKind::PrefillOnly ? 0.0 : static_cast<double>(r.output_tokens);
    out.push_back({static_cast<double>(r.input_tokens), g, r.latency_s, r.energy_wh[c]});
  }
  return out;
}

std::vector<LatencySample> to_fit_samples(std::span<const PromptDecomposition> prompts, Component component,
                                          std::size_t* skipped) {
  std::vector<LatencySample> out;
  std::size_t dropped = 0;
  const auto c = static_cast<Eigen::Index>(component);
  for (const auto& p : prompts) {
    if (p.prefill_latency_s > 0.0) {
      out.push_back({p.input_tokens, 0.0, p.prefill_latency_s, p.prefill_mean_wh[c]});
    } else {
      ++dropped;
    }
    if (p.decode_latency_s > 0.0) {
      out.push_back({p.input_tokens, p.output_tokens, p.decode_latency_s, p.decode_wh[c]});
    } else {
      ++dropped;
    }
  }
  if (skipped) *skipped = dropped;
  return out;
}

std::vector<RunRecord> synth_trace(const CoefficientSet& coeffs, std::span<const GridPoint> plan,
                                   const SynthTraceOptions& options) {
  require(coeffs.prefill_latency && coeffs.decode_latency && coeffs.prefill_energy && coeffs.decode_energy,
          "synth_trace needs all four coefficient families");
  require(options.runs_per_kind >= 1, "runs_per_kind must be >= 1");
  std::vector<GridPoint> prefill_plan;
  std::vector<GridPoint> decode_plan;
  for (const auto& p : plan) {
    require(p.g >= 1.0 && p.g == std::floor(p.g), "synth_trace plan points need integer g >= 1");
    require(p.s >= 1.0 && p.s == std::floor(p.s), "synth_trace plan points need integer s >= 1");
    prefill_plan.push_back({p.s, 0.0});
    decode_plan.push_back(p);
  }

  // Independent streams per run and role so adding runs never reshuffles
  // earlier draws.
  auto stream = [&](std::size_t run, std::size_t role) {
    return options.seed + 0x9E3779B97F4A7C15ULL * (3 * run + role + 1);
  };

  std::vector<RunRecord> out;
  auto emit = [&](std::size_t i, RunKind kind, double latency, double wh) {
    RunRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "p%05zu", i);
    r.prompt_id = id;
    r.run_kind = kind;
    r.input_tokens = static_cast<std::int64_t>(plan[i].s);
    r.output_tokens = kind == RunKind::PrefillOnly ? 1 : static_cast<std::int64_t>(plan[i].g);
    r.latency_s = latency;
    r.energy_wh << wh, 0.0, 0.0;
    r.model_id = options.model_id;
    r.precision = options.precision;
    r.batch = 1;
    validate(r);
    out.push_back(std::move(r));
  };

  std::vector<std::vector<LatencySample>> prefill_runs, full_prefill, full_decode;
  for (std::size_t run = 0; run < options.runs_per_kind; ++run) {
    prefill_runs.push_back(synth_generate(coeffs, prefill_plan, options.noise, stream(run, 0)));
    full_prefill.push_back(synth_generate(coeffs, prefill_plan, options.noise, stream(run, 1)));
    full_decode.push_back(synth_generate(coeffs, decode_plan, options.noise, stream(run, 2)));
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    for (std::size_t run = 0; run < options.runs_per_kind; ++run) {
      const auto& p = prefill_runs[run][i];
      emit(i, RunKind::PrefillOnly, p.t, *p.energy_wh);
    }
    for (std::size_t run = 0; run < options.runs_per_kind; ++run) {
      const auto& p = full_prefill[run][i];
      const auto& d = full_decode[run][i];
      emit(i, RunKind::Full, p.t + d.t, *p.energy_wh + *d.energy_wh);
    }
  }
  return out;
}

}  // namespace infercost
