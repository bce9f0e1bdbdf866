#include "infercost/phase_model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

#include "infercost/error.hpp"
#include "infercost/kv_config.hpp"

namespace infercost {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

Checked check(double value) { return {value, !(value > 0.0)}; }

// A family is present when any of its keys is; then all of them must be.
bool family_present(const KeyValueFile& config, std::initializer_list<std::string_view> keys) {
  bool any = false;
  for (auto k : keys) any = any || config.has(k);
  if (!any) return false;
  for (auto k : keys) {
    if (!config.has(k)) {
      throw Error(Errc::Parse, config.source() + ": coefficient family is missing '" + std::string(k) + "'");
    }
  }
  return true;
}

template <typename Pred>
std::vector<const LatencySample*> select(std::span<const LatencySample> samples, Pred pred) {
  std::vector<const LatencySample*> out;
  for (const auto& s : samples) {
    validate(s);
    if (pred(s)) out.push_back(&s);
  }
  return out;
}

void require_count(std::size_t have, std::size_t need, const char* what) {
  if (have < need) {
    throw Error(Errc::InsufficientSamples,
                std::string(what) + " needs at least " + std::to_string(need) + " samples, got " + std::to_string(have));
  }
}

}  // namespace

Checked checked_prefill_latency(const PrefillLatencyCoeffs<>& k, double s) {
  require(s >= 0.0, "prefill latency needs s >= 0");
  return check(eval_prefill_latency(k, s));
}

Checked checked_decode_latency(const DecodeLatencyCoeffs<>& k, double s, double g) {
  require(s >= 1.0 && g >= 1.0, "decode latency needs s >= 1 and g >= 1");
  return check(eval_decode_latency(k, s, g));
}

Checked checked_prefill_energy(const PrefillEnergyCoeffs<>& k, double s) {
  require(s >= 0.0, "prefill energy needs s >= 0");
  return check(eval_prefill_energy(k, s));
}

Checked checked_decode_energy(const DecodeEnergyCoeffs<>& k, double s, double g) {
  require(s >= 1.0 && g >= 1.0, "decode energy needs s >= 1 and g >= 1");
  return check(eval_decode_energy(k, s, g));
}

CoefficientSet CoefficientSet::from_config(const KeyValueFile& config) {
  config.reject_unknown({"alpha", "beta", "gamma", "eta", "theta", "phi", "rho", "a", "b", "c", "d", "g_intercept"});
  CoefficientSet set;
  if (family_present(config, {"alpha", "beta", "gamma"})) {
    set.prefill_latency = PrefillLatencyCoeffs<>{config.number("alpha"), config.number("beta"), config.number("gamma")};
  }
  if (family_present(config, {"eta", "theta", "phi", "rho"})) {
    set.decode_latency = DecodeLatencyCoeffs<>{config.number("eta"), config.number("theta"), config.number("phi"),
                                               config.number("rho")};
  }
  if (family_present(config, {"a", "b"})) {
    set.prefill_energy = PrefillEnergyCoeffs<>{config.number("a"), config.number("b")};
  }
  if (family_present(config, {"c", "d", "g_intercept"})) {
    set.decode_energy = DecodeEnergyCoeffs<>{config.number("c"), config.number("d"), config.number("g_intercept")};
  }
  return set;
}

CoefficientSet CoefficientSet::load(const std::filesystem::path& path) {
  return from_config(KeyValueFile::load(path));
}

void CoefficientSet::write(std::ostream& out) const {
  auto kv = [&](const char* key, double v) { out << key << " = " << format_scientific(v) << '\n'; };
  if (prefill_latency) {
    out << "# prefill latency [s]: alpha*s + beta*s^2 + gamma\n";
    kv("alpha", prefill_latency->alpha);
    kv("beta", prefill_latency->beta);
    kv("gamma", prefill_latency->gamma);
  }
  if (decode_latency) {
    out << "# decode latency [s]: eta*g + theta*s*g + phi*g^2 + rho\n";
    kv("eta", decode_latency->eta);
    kv("theta", decode_latency->theta);
    kv("phi", decode_latency->phi);
    kv("rho", decode_latency->rho);
  }
  if (prefill_energy) {
    out << "# prefill energy [Wh]: a*s + b\n";
    kv("a", prefill_energy->a);
    kv("b", prefill_energy->b);
  }
  if (decode_energy) {
    out << "# decode energy [Wh]: c*g + d*s*g + g_intercept\n";
    kv("c", decode_energy->c);
    kv("d", decode_energy->d);
    kv("g_intercept", decode_energy->g_intercept);
  }
}

void validate(const LatencySample& sample) {
  require(std::isfinite(sample.s) && sample.s >= 1.0, "sample s must be >= 1");
  require(std::isfinite(sample.g) && sample.g >= 0.0, "sample g must be >= 0");
  require(std::isfinite(sample.t) && sample.t > 0.0, "sample t must be > 0");
  if (sample.energy_wh) require(std::isfinite(*sample.energy_wh), "sample energy must be finite");
}

PhaseFit<PrefillLatencyCoeffs<>> fit_prefill_latency(std::span<const LatencySample> samples, const FitOptions& opts) {
  const auto rows = select(samples, [](const LatencySample& s) { return s.g == 0.0; });
  require_count(rows.size(), 3, "prefill latency fit");
  DesignMatrix<double> x(rows.size(), 3);
  Vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = rows[i]->s;
    x.row(i) << s, s * s, 1.0;
    y[i] = rows[i]->t;
  }
  PhaseFit<PrefillLatencyCoeffs<>> out;
  out.fit = ols_fit(x, y, opts.condition_threshold);
  const auto& c = out.fit.coefficients;
  out.coeffs = {c[0], c[1], c[2]};
  out.valid = c[0] >= 0.0 && c[1] >= 0.0;
  return out;
}

PhaseFit<DecodeLatencyCoeffs<>> fit_decode_latency(std::span<const LatencySample> samples, const FitOptions& opts) {
  const auto rows = select(samples, [](const LatencySample& s) { return s.g >= 1.0; });
  require_count(rows.size(), 4, "decode latency fit");
  DesignMatrix<double> x(rows.size(), 4);
  Vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = rows[i]->s;
    const double g = rows[i]->g;
    x.row(i) << g, s * g, g * g, 1.0;
    y[i] = rows[i]->t;
  }
  PhaseFit<DecodeLatencyCoeffs<>> out;
  out.fit = ols_fit(x, y, opts.condition_threshold);
  const auto& c = out.fit.coefficients;
  out.coeffs = {c[0], c[1], c[2], c[3]};
  out.valid = c[0] >= 0.0 && c[1] >= 0.0 && c[2] >= 0.0;
  return out;
}

PhaseFit<PrefillEnergyCoeffs<>> fit_prefill_energy(std::span<const LatencySample> samples, const FitOptions& opts) {
  const auto rows = select(samples, [](const LatencySample& s) { return s.g == 0.0 && s.energy_wh.has_value(); });
  require_count(rows.size(), 2, "prefill energy fit");
  DesignMatrix<double> x(rows.size(), 2);
  Vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(i) << rows[i]->s, 1.0;
    y[i] = *rows[i]->energy_wh;
  }
  PhaseFit<PrefillEnergyCoeffs<>> out;
  out.fit = ols_fit(x, y, opts.condition_threshold);
  const auto& c = out.fit.coefficients;
  out.coeffs = {c[0], c[1]};
  out.valid = c[0] >= 0.0;
  return out;
}

PhaseFit<DecodeEnergyCoeffs<>> fit_decode_energy(std::span<const LatencySample> samples, const FitOptions& opts) {
  const auto rows = select(samples, [](const LatencySample& s) { return s.g >= 1.0 && s.energy_wh.has_value(); });
  require_count(rows.size(), 3, "decode energy fit");
  DesignMatrix<double> x(rows.size(), 3);
  Vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = rows[i]->s;
    const double g = rows[i]->g;
    x.row(i) << g, s * g, 1.0;
    y[i] = *rows[i]->energy_wh;
  }
  PhaseFit<DecodeEnergyCoeffs<>> out;
  out.fit = ols_fit(x, y, opts.condition_threshold);
  const auto& c = out.fit.coefficients;
  out.coeffs = {c[0], c[1], c[2]};
  out.valid = c[0] >= 0.0 && c[1] >= 0.0;
  return out;
}

double energy_from_power(Phase phase, double seconds, const HardwareProfile& hw) {
  require(seconds >= 0.0, "phase duration must be >= 0");
  const double watts = phase == Phase::Prefill ? hw.p_prefill() : hw.p_decode();
  return seconds * watts / kSecondsPerHour;
}

bool ConsistencyReport::any_flagged() const {
  for (const auto& e : entries) {
    if (e.flagged) return true;
  }
  return false;
}

ConsistencyReport consistency_report(const PrefillLatencyCoeffs<>& prefill_latency,
                                     const DecodeLatencyCoeffs<>& decode_latency,
                                     const PrefillEnergyCoeffs<>& prefill_energy,
                                     const DecodeEnergyCoeffs<>& decode_energy, const HardwareProfile& hw,
                                     double threshold) {
  ConsistencyReport report;
  report.threshold = threshold;
  auto add = [&](const char* energy_name, const char* latency_name, double fitted, double latency_coeff, Phase phase) {
    ConsistencyEntry e;
    e.energy_coeff = energy_name;
    e.latency_coeff = latency_name;
    e.fitted = fitted;
    e.implied = energy_from_power(phase, 1.0, hw) * latency_coeff;
    e.deviation = e.implied != 0.0 ? fitted / e.implied - 1.0 : std::numeric_limits<double>::infinity();
    e.flagged = !(std::abs(e.deviation) <= threshold);
    report.entries.push_back(std::move(e));
  };
  add("A", "alpha", prefill_energy.a, prefill_latency.alpha, Phase::Prefill);
  add("B", "gamma", prefill_energy.b, prefill_latency.gamma, Phase::Prefill);
  add("C", "eta", decode_energy.c, decode_latency.eta, Phase::Decode);
  add("D", "theta", decode_energy.d, decode_latency.theta, Phase::Decode);
  add("G", "rho", decode_energy.g_intercept, decode_latency.rho, Phase::Decode);
  return report;
}

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Constant: return "constant";
    case Regime::Linear: return "linear";
    case Regime::Quadratic: return "quadratic";
  }
  return "?";
}

Regime regime_classify(double s, const RegimeThresholds& thresholds) {
  require(s >= 0.0, "regime_classify needs s >= 0");
  if (s <= thresholds.constant_max) return Regime::Constant;
  if (s <= thresholds.quadratic_min) return Regime::Linear;
  return Regime::Quadratic;
}

double quadratic_crossover(const PrefillLatencyCoeffs<>& k) {
  require(k.beta > 0.0, "crossover needs beta > 0");
  return k.alpha / k.beta;
}

std::vector<GridPoint> make_grid(std::span<const double> s_values, std::span<const double> g_values) {
  std::vector<GridPoint> grid;
  grid.reserve(s_values.size() * g_values.size());
  for (double s : s_values) {
    for (double g : g_values) grid.push_back({s, g});
  }
  return grid;
}

std::vector<LatencySample> synth_generate(const CoefficientSet& coeffs, std::span<const GridPoint> plan, double noise,
                                          std::uint64_t seed) {
  require(std::isfinite(noise) && noise >= 0.0, "noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto perturb = [&](double truth) { return noise > 0.0 ? truth * (1.0 + noise * normal(rng)) : truth; };

  std::vector<LatencySample> out;
  out.reserve(plan.size());
  for (const auto& p : plan) {
    LatencySample sample{p.s, p.g, 0.0, std::nullopt};
    double t = 0.0;
    std::optional<double> e;
    if (p.g == 0.0) {
      require(coeffs.prefill_latency.has_value(), "plan has prefill points but no prefill latency coefficients");
      t = eval_prefill_latency(*coeffs.prefill_latency, p.s);
      if (coeffs.prefill_energy) e = eval_prefill_energy(*coeffs.prefill_energy, p.s);
    } else {
      require(coeffs.decode_latency.has_value(), "plan has decode points but no decode latency coefficients");
      t = eval_decode_latency(*coeffs.decode_latency, p.s, p.g);
      if (coeffs.decode_energy) e = eval_decode_energy(*coeffs.decode_energy, p.s, p.g);
    }
    if (!(t > 0.0)) {
      throw Error(Errc::ModelOutOfRange, "latency polynomial is non-positive at s=" + std::to_string(p.s) +
                                             " g=" + std::to_string(p.g));
    }
    sample.t = perturb(t);
    if (e) sample.energy_wh = perturb(*e);
    validate(sample);
    out.push_back(sample);
  }
  return out;
}

}  // namespace infercost
