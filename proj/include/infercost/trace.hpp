#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "infercost/phase_model.hpp"

namespace infercost {

enum class RunKind { PrefillOnly, Full };
enum class Component { Gpu = 0, Cpu = 1, Ram = 2 };

/// Per-component energy in Wh, indexed by Component.
using ComponentWh = Eigen::Array3d;

const char* to_string(RunKind kind) noexcept;
const char* to_string(Component c) noexcept;
RunKind parse_run_kind(const std::string& text);
Component parse_component(const std::string& text);

/// One measured generation. Field names double as trace column names.
struct RunRecord {
  std::string prompt_id;
  RunKind run_kind = RunKind::Full;
  std::int64_t input_tokens = 1;
  std::int64_t output_tokens = 1;
  double latency_s = 0.0;
  ComponentWh energy_wh = ComponentWh::Zero();  ///< gpu_wh, cpu_wh, ram_wh
  std::string model_id;
  std::string precision;
  std::int64_t batch = 1;

  double gpu_wh() const { return energy_wh[0]; }
  double cpu_wh() const { return energy_wh[1]; }
  double ram_wh() const { return energy_wh[2]; }

  bool operator==(const RunRecord& o) const {
    return prompt_id == o.prompt_id && run_kind == o.run_kind && input_tokens == o.input_tokens &&
           output_tokens == o.output_tokens && latency_s == o.latency_s && (energy_wh == o.energy_wh).all() &&
           model_id == o.model_id && precision == o.precision && batch == o.batch;
  }
};

/// Throws InvalidArgument when a record breaks its invariants.
void validate(const RunRecord& record);

enum class TraceFormat { Delimited, LineJson };

/// "delimited"/"csv" or "line-json"/"jsonl"; anything else is UnknownFormat.
TraceFormat parse_trace_format(const std::string& text);

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct IngestOptions {
  /// External column/key name -> RunRecord field name.
  std::map<std::string, std::string> schema;
  /// Records dropped at the start of every (prompt_id, run_kind) group, e.g.
  /// warmup runs left in the trace.
  std::size_t drop_first = 0;
};

struct ParseResult {
  std::vector<RunRecord> records;
  std::vector<LineError> errors;
};

/// Order-preserving. Malformed lines are reported with their 1-based line
/// number and never silently dropped. Throws EmptyInput on a blank stream.
ParseResult parse_records(std::istream& in, TraceFormat format, const IngestOptions& options = {});

/// Writes a header row for the delimited format; energies at full precision.
void write_records(std::ostream& out, std::span<const RunRecord> records, TraceFormat format);

/// Loads a `external = field` schema map.
std::map<std::string, std::string> load_schema_map(const std::string& path);

struct PromptDecomposition {
  std::string prompt_id;
  double input_tokens = 0.0;   ///< mean over all runs of the prompt
  double output_tokens = 0.0;  ///< mean over full runs
  ComponentWh prefill_mean_wh = ComponentWh::Zero();
  ComponentWh full_mean_wh = ComponentWh::Zero();
  ComponentWh decode_wh = ComponentWh::Zero();  ///< full - prefill
  double prefill_latency_s = 0.0;
  double full_latency_s = 0.0;
  double decode_latency_s = 0.0;
  std::size_t n_prefill_runs = 0;
  std::size_t n_full_runs = 0;
  bool negative_decode = false;
};

struct MissingKind {
  std::string prompt_id;
  RunKind missing = RunKind::Full;
};

struct DecompositionResult {
  std::vector<PromptDecomposition> prompts;  ///< in order of first appearance
  std::vector<MissingKind> missing;
};

/// Per prompt: decode = mean(full runs) - mean(prefill-only runs), per
/// component. Prompts lacking a run kind go to `missing`.
DecompositionResult decompose(std::span<const RunRecord> records);

enum class EnergyPhase { Prefill, Decode, Full };

const char* to_string(EnergyPhase phase) noexcept;
EnergyPhase parse_energy_phase(const std::string& text);

struct ComponentStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  double min = 0.0;
  double max = 0.0;
};

struct EnergyStats {
  EnergyPhase phase = EnergyPhase::Full;
  std::array<ComponentStats, 3> components;
  double total_mean = 0.0;  ///< sum of the component means

  const ComponentStats& operator[](Component c) const { return components[static_cast<std::size_t>(c)]; }
};

/// Prefill selects prefill-only runs, Full selects full runs. Decode needs
/// decompositions and is rejected here.
EnergyStats aggregate(std::span<const RunRecord> records, EnergyPhase phase);
EnergyStats aggregate(std::span<const PromptDecomposition> prompts, EnergyPhase phase);

std::vector<double> select_energies(std::span<const RunRecord> records, EnergyPhase phase, Component component);
std::vector<double> select_energies(std::span<const PromptDecomposition> prompts, EnergyPhase phase,
                                    Component component);

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 strictly increasing edges
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;  ///< below edges.front(), explicit edges only
  std::size_t overflow = 0;   ///< above edges.back(), explicit edges only
  double mean = 0.0;
  double median = 0.0;
  bool right_skewed = false;  ///< mean > median
};

/// Equal-width bins spanning [min, max]; the last bin is closed.
Histogram histogram(std::span<const double> values, std::size_t bins);
/// Explicit edges; bins are [e_i, e_{i+1}) except the last, which is closed.
Histogram histogram(std::span<const double> values, std::span<const double> edges);

/// Two columns: bin_left_edge,count.
void write_histogram(std::ostream& out, const Histogram& hist);

/// Prefill-only runs become g = 0 samples; full runs keep their output count
/// as g with whole-generation latency and energy.
std::vector<LatencySample> to_fit_samples(std::span<const RunRecord> records, Component component = Component::Gpu);

/// One prefill sample (g = 0) and one decode-only sample per prompt. Samples
/// whose latency is not positive are skipped and counted in `skipped`.
std::vector<LatencySample> to_fit_samples(std::span<const PromptDecomposition> prompts,
                                          Component component = Component::Gpu, std::size_t* skipped = nullptr);

struct SynthTraceOptions {
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t runs_per_kind = 1;
  std::string model_id = "synthetic";
  std::string precision = "fp32";
};

/// Builds a trace from the four polynomial families: one prompt per plan
/// point (g >= 1), with prefill-only runs from the prefill families and full
/// runs from prefill + decode. Energies are GPU-only.
std::vector<RunRecord> synth_trace(const CoefficientSet& coeffs, std::span<const GridPoint> plan,
                                   const SynthTraceOptions& options = {});

}  // namespace infercost
