#include "infercost/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "infercost/error.hpp"

namespace infercost {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

std::int64_t as_count(double v, const char* name) {
  require(v >= 1.0 && v == std::floor(v), std::string("analytic estimates need integer ") + name + " >= 1");
  return static_cast<std::int64_t>(v);
}

void note(EnergyBreakdown& b, const Checked& c, const char* what) {
  if (c.out_of_range) b.warnings.push_back(std::string("ModelOutOfRange: ") + what + " polynomial is non-positive");
}

EnergyBreakdown from_fitted(const FittedSource& src, double s, double g) {
  EnergyBreakdown b;
  const auto& k = src.coeffs;
  std::string prefill_how, decode_how;
  if (k.prefill_energy) {
    const auto e = checked_prefill_energy(*k.prefill_energy, s);
    note(b, e, "prefill energy");
    b.prefill_wh = e.value;
    prefill_how = "fitted energy";
  } else if (k.prefill_latency && src.hw) {
    const auto t = checked_prefill_latency(*k.prefill_latency, s);
    note(b, t, "prefill latency");
    b.prefill_wh = t.value * src.hw->p_prefill() / kSecondsPerHour;
    prefill_how = "fitted latency x power";
  } else {
    throw Error(Errc::InvalidArgument, "coefficients cannot produce prefill energy");
  }
  if (k.decode_energy) {
    const auto e = checked_decode_energy(*k.decode_energy, s, g);
    note(b, e, "decode energy");
    b.decode_wh = e.value;
    decode_how = "fitted energy";
  } else if (k.decode_latency && src.hw) {
    const auto t = checked_decode_latency(*k.decode_latency, s, g);
    note(b, t, "decode latency");
    b.decode_wh = t.value * src.hw->p_decode() / kSecondsPerHour;
    decode_how = "fitted latency x power";
  } else {
    throw Error(Errc::InvalidArgument, "coefficients cannot produce decode energy");
  }
  b.provenance = prefill_how == decode_how ? prefill_how : "prefill: " + prefill_how + "; decode: " + decode_how;
  return b;
}

EnergyBreakdown from_analytic(const AnalyticSource& src, double s, double g) {
  const auto si = as_count(s, "s");
  const auto gi = as_count(g, "g");
  EnergyBreakdown b;
  b.prefill_wh = energy_from_power(Phase::Prefill, predict_prefill_latency(src.model, src.hw, si).total_seconds, src.hw);
  b.decode_wh = energy_from_power(Phase::Decode, predict_decode_latency(src.model, src.hw, si, gi).total_seconds, src.hw);
  b.provenance = "analytic roofline (" + src.model.name() + " on " + src.hw.name() + ")";
  return b;
}

}  // namespace

EnergyBreakdown estimate_interaction(const EnergySource& source, double s, double g) {
  require(std::isfinite(s) && s >= 1.0 && std::isfinite(g) && g >= 1.0, "interaction needs s >= 1 and g >= 1");
  EnergyBreakdown b = std::holds_alternative<FittedSource>(source) ? from_fitted(std::get<FittedSource>(source), s, g)
                                                                    : from_analytic(std::get<AnalyticSource>(source), s, g);
  b.total_wh = b.prefill_wh + b.decode_wh;
  return b;
}

WorkloadSpec::WorkloadSpec(std::vector<WorkloadEntry> entries) : spec_(std::move(entries)) {
  const auto& e = std::get<0>(spec_);
  require(!e.empty(), "workload needs at least one entry");
  for (const auto& w : e) {
    require(std::isfinite(w.weight) && w.weight > 0.0, "workload weights must be positive and finite");
    require(w.s >= 1.0 && w.g >= 1.0, "workload entries need s >= 1 and g >= 1");
  }
}

WorkloadSpec::WorkloadSpec(ParametricWorkload parametric) : spec_(parametric) {
  require(parametric.count >= 1, "parametric workload needs count >= 1");
  require(std::isfinite(parametric.s_mean) && std::isfinite(parametric.g_mean), "workload means must be finite");
  require(parametric.s_std >= 0.0 && parametric.g_std >= 0.0, "workload std must be >= 0");
}

std::vector<WorkloadEntry> WorkloadSpec::entries() const {
  if (const auto* e = std::get_if<std::vector<WorkloadEntry>>(&spec_)) return *e;
  const auto& p = std::get<ParametricWorkload>(spec_);
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> s_dist(p.s_mean, p.s_std > 0.0 ? p.s_std : 1.0);
  std::normal_distribution<double> g_dist(p.g_mean, p.g_std > 0.0 ? p.g_std : 1.0);
  auto draw = [&](std::normal_distribution<double>& d, double mean, double std) {
    const double v = std > 0.0 ? d(rng) : mean;
    return std::max(1.0, std::round(v));
  };
  std::vector<WorkloadEntry> out;
  out.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    const double s = draw(s_dist, p.s_mean, p.s_std);
    const double g = draw(g_dist, p.g_mean, p.g_std);
    out.push_back({s, g, 1.0});
  }
  return out;
}

WorkloadEstimate estimate_workload(const EnergySource& source, const WorkloadSpec& workload) {
  WorkloadEstimate out;
  double weight_sum = 0.0;
  for (const auto& e : workload.entries()) {
    auto b = estimate_interaction(source, e.s, e.g);
    weight_sum += e.weight;
    out.mean.prefill_wh += e.weight * b.prefill_wh;
    out.mean.decode_wh += e.weight * b.decode_wh;
    for (const auto& w : b.warnings) {
      if (std::find(out.mean.warnings.begin(), out.mean.warnings.end(), w) == out.mean.warnings.end()) {
        out.mean.warnings.push_back(w);
      }
    }
    out.mean.provenance = b.provenance;
    out.rows.push_back({e, std::move(b)});
  }
  out.mean.prefill_wh /= weight_sum;
  out.mean.decode_wh /= weight_sum;
  out.mean.total_wh = out.mean.prefill_wh + out.mean.decode_wh;
  return out;
}

double led_equivalent_minutes(double wh, double led_watts) {
  require(std::isfinite(wh) && wh >= 0.0, "energy must be >= 0");
  require(std::isfinite(led_watts) && led_watts > 0.0, "LED power must be > 0");
  return wh / led_watts * 60.0;
}

FleetEnergy fleet_extrapolate(double per_interaction_wh, double interactions_per_day) {
  require(per_interaction_wh >= 0.0 && interactions_per_day >= 0.0, "fleet inputs must be >= 0");
  FleetEnergy f;
  f.kwh_per_day = per_interaction_wh * interactions_per_day / 1000.0;
  f.mwh_per_year = f.kwh_per_day * kDaysPerYear / 1000.0;
  if (!std::isfinite(f.kwh_per_day) || !std::isfinite(f.mwh_per_year)) {
    throw Error(Errc::Overflow, "fleet energy is not representable");
  }
  return f;
}

ModelComparison compare_models(std::span<const ModelSpec> specs, const HardwareProfile& hw,
                               const WorkloadSpec& workload, std::span<const double> g_grid) {
  require(!specs.empty(), "compare_models needs at least one model");
  const auto entries = workload.entries();
  double weight_sum = 0.0, s_mean = 0.0, g_mean = 0.0;
  for (const auto& e : entries) {
    weight_sum += e.weight;
    s_mean += e.weight * e.s;
    g_mean += e.weight * e.g;
  }
  s_mean /= weight_sum;
  g_mean /= weight_sum;
  const auto contour_s = static_cast<std::int64_t>(std::max(1.0, std::round(s_mean)));

  ModelComparison out;
  for (const auto& spec : specs) {
    const auto est = estimate_workload(AnalyticSource{spec, hw}, workload);
    out.rows.push_back({spec.name(), spec.n_params(), est.mean.total_wh, est.mean.total_wh / g_mean});
    for (double g : g_grid) {
      const auto seconds = predict_decode_latency(spec, hw, contour_s, as_count(g, "g")).total_seconds;
      out.contour.push_back({spec.name(), spec.n_params(), g, energy_from_power(Phase::Decode, seconds, hw)});
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.n_params < b.n_params; });
  std::stable_sort(out.contour.begin(), out.contour.end(),
                   [](const ContourPoint& a, const ContourPoint& b) { return a.n_params < b.n_params; });
  return out;
}

}  // namespace infercost
