#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "infercost/phase_model.hpp"
#include "infercost/roofline.hpp"
#include "infercost/xformer_cost.hpp"

namespace infercost {

/// Fitted polynomials. Energy families are used directly; a phase with only
/// latency coefficients is converted through the profile's phase power.
struct FittedSource {
  CoefficientSet coeffs;
  std::optional<HardwareProfile> hw;
};

/// Roofline prediction from architecture and hardware.
struct AnalyticSource {
  ModelSpec model;
  HardwareProfile hw;
};

using EnergySource = std::variant<FittedSource, AnalyticSource>;

struct EnergyBreakdown {
  double prefill_wh = 0.0;
  double decode_wh = 0.0;
  double total_wh = 0.0;  ///< prefill_wh + decode_wh
  std::string provenance;
  std::vector<std::string> warnings;
};

EnergyBreakdown estimate_interaction(const EnergySource& source, double s, double g);

struct WorkloadEntry {
  double s = 1.0;
  double g = 1.0;
  double weight = 1.0;
};

/// Independent normal draws for s and g, rounded and clamped to >= 1.
struct ParametricWorkload {
  double s_mean = 0.0;
  double s_std = 0.0;
  double g_mean = 0.0;
  double g_std = 0.0;
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

class WorkloadSpec {
 public:
  explicit WorkloadSpec(std::vector<WorkloadEntry> entries);
  explicit WorkloadSpec(ParametricWorkload parametric);

  /// Explicit entries, or the deterministic draws of a parametric workload.
  std::vector<WorkloadEntry> entries() const;

 private:
  std::variant<std::vector<WorkloadEntry>, ParametricWorkload> spec_;
};

struct WorkloadRow {
  WorkloadEntry entry;
  EnergyBreakdown breakdown;
};

struct WorkloadEstimate {
  EnergyBreakdown mean;  ///< weight-normalized mean over entries
  std::vector<WorkloadRow> rows;
};

WorkloadEstimate estimate_workload(const EnergySource& source, const WorkloadSpec& workload);

/// Minutes an LED of `led_watts` runs on `wh`.
double led_equivalent_minutes(double wh, double led_watts = 5.0);

inline constexpr double kDaysPerYear = 365.25;

struct FleetEnergy {
  double kwh_per_day = 0.0;
  double mwh_per_year = 0.0;
};

/// Throws Overflow when the result is not finite.
FleetEnergy fleet_extrapolate(double per_interaction_wh, double interactions_per_day);

struct ComparisonRow {
  std::string name;
  double n_params = 0.0;
  double mean_total_wh = 0.0;
  double wh_per_token = 0.0;  ///< mean total over mean generated tokens
};

struct ContourPoint {
  std::string name;
  double n_params = 0.0;
  double g = 0.0;
  double decode_wh = 0.0;
};

struct ModelComparison {
  std::vector<ComparisonRow> rows;     ///< ordered by n_params
  std::vector<ContourPoint> contour;   ///< model size x output length, at the workload's mean s
};

ModelComparison compare_models(std::span<const ModelSpec> specs, const HardwareProfile& hw,
                               const WorkloadSpec& workload, std::span<const double> g_grid = {});

}  // namespace infercost
