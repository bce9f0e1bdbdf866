#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infercost/numerics.hpp"
#include "infercost/roofline.hpp"

namespace infercost {

class KeyValueFile;

// Closed-form phase polynomials. The evaluators are plain expressions and
// accept either scalars or Eigen arrays for s and g.

/// t_prefill(s) = alpha s + beta s^2 + gamma  [s]
template <typename Scalar = double>
struct PrefillLatencyCoeffs {
  Scalar alpha{};  ///< s/token
  Scalar beta{};   ///< s/token^2
  Scalar gamma{};  ///< s
};

/// t_decode(s, g) = eta g + theta s g + phi g^2 + rho  [s]
template <typename Scalar = double>
struct DecodeLatencyCoeffs {
  Scalar eta{};    ///< s/token
  Scalar theta{};  ///< s/token^2
  Scalar phi{};    ///< s/token^2
  Scalar rho{};    ///< s, may be negative
};

/// E_prefill(s) = a s + b  [Wh]
template <typename Scalar = double>
struct PrefillEnergyCoeffs {
  Scalar a{};  ///< Wh/token
  Scalar b{};  ///< Wh
};

/// E_decode(s, g) = c g + d s g + g_intercept  [Wh]
template <typename Scalar = double>
struct DecodeEnergyCoeffs {
  Scalar c{};            ///< Wh/token
  Scalar d{};            ///< Wh/token^2
  Scalar g_intercept{};  ///< Wh, may be negative
};

template <typename Scalar, typename S>
auto eval_prefill_latency(const PrefillLatencyCoeffs<Scalar>& k, const S& s) {
  return k.alpha * s + k.beta * s * s + k.gamma;
}

template <typename Scalar, typename S, typename G>
auto eval_decode_latency(const DecodeLatencyCoeffs<Scalar>& k, const S& s, const G& g) {
  return k.eta * g + k.theta * s * g + k.phi * g * g + k.rho;
}

template <typename Scalar, typename S>
auto eval_prefill_energy(const PrefillEnergyCoeffs<Scalar>& k, const S& s) {
  return k.a * s + k.b;
}

template <typename Scalar, typename S, typename G>
auto eval_decode_energy(const DecodeEnergyCoeffs<Scalar>& k, const S& s, const G& g) {
  return k.c * g + k.d * s * g + k.g_intercept;
}

/// A scalar prediction with the ModelOutOfRange warning channel: the fitted
/// polynomials can go non-positive outside their fitted range.
struct Checked {
  double value = 0.0;
  bool out_of_range = false;
};

Checked checked_prefill_latency(const PrefillLatencyCoeffs<>& k, double s);
Checked checked_decode_latency(const DecodeLatencyCoeffs<>& k, double s, double g);
Checked checked_prefill_energy(const PrefillEnergyCoeffs<>& k, double s);
Checked checked_decode_energy(const DecodeEnergyCoeffs<>& k, double s, double g);

/// Any subset of the four coefficient families. Serialized as flat
/// `key = value` text using the struct field names.
struct CoefficientSet {
  std::optional<PrefillLatencyCoeffs<>> prefill_latency;
  std::optional<DecodeLatencyCoeffs<>> decode_latency;
  std::optional<PrefillEnergyCoeffs<>> prefill_energy;
  std::optional<DecodeEnergyCoeffs<>> decode_energy;

  static CoefficientSet from_config(const KeyValueFile& config);
  static CoefficientSet load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
};

/// One fitting observation. g = 0 marks a prefill-only run.
struct LatencySample {
  double s = 1.0;
  double g = 0.0;
  double t = 0.0;
  std::optional<double> energy_wh;
};

/// Throws InvalidArgument unless s >= 1, g >= 0, t > 0 and all finite.
void validate(const LatencySample& sample);

struct FitOptions {
  double condition_threshold = kDefaultConditionThreshold;
};

/// Raw least-squares coefficients plus diagnostics. `valid` reports whether
/// the sign constraints of the coefficient type hold; nothing is clamped.
template <typename Coeffs>
struct PhaseFit {
  Coeffs coeffs;
  FitResult<double> fit;
  bool valid = true;
};

/// Basis {s, s^2, 1} over samples with g = 0.
PhaseFit<PrefillLatencyCoeffs<>> fit_prefill_latency(std::span<const LatencySample> samples, const FitOptions& = {});
/// Basis {g, s g, g^2, 1} over samples with g >= 1.
PhaseFit<DecodeLatencyCoeffs<>> fit_decode_latency(std::span<const LatencySample> samples, const FitOptions& = {});
/// Basis {s, 1} over samples with g = 0 carrying energy.
PhaseFit<PrefillEnergyCoeffs<>> fit_prefill_energy(std::span<const LatencySample> samples, const FitOptions& = {});
/// Basis {g, s g, 1} over samples with g >= 1 carrying energy.
PhaseFit<DecodeEnergyCoeffs<>> fit_decode_energy(std::span<const LatencySample> samples, const FitOptions& = {});

enum class Phase { Prefill, Decode };

inline constexpr double kSecondsPerHour = 3600.0;

/// t * P_phase / 3600.
double energy_from_power(Phase phase, double seconds, const HardwareProfile& hw);

struct ConsistencyEntry {
  std::string energy_coeff;   ///< "A", "B", "C", "D", "G"
  std::string latency_coeff;  ///< "alpha", "gamma", "eta", "theta", "rho"
  double fitted = 0.0;        ///< energy coefficient as fitted
  double implied = 0.0;       ///< P_phase * latency coefficient / 3600
  double deviation = 0.0;     ///< fitted / implied - 1
  bool flagged = false;
};

struct ConsistencyReport {
  std::vector<ConsistencyEntry> entries;
  double threshold = 0.10;
  bool any_flagged() const;
};

/// Compares each energy coefficient with the one implied by the phase power
/// and its latency counterpart. Flags |deviation| > threshold; never fails.
ConsistencyReport consistency_report(const PrefillLatencyCoeffs<>& prefill_latency,
                                     const DecodeLatencyCoeffs<>& decode_latency,
                                     const PrefillEnergyCoeffs<>& prefill_energy,
                                     const DecodeEnergyCoeffs<>& decode_energy, const HardwareProfile& hw,
                                     double threshold = 0.10);

enum class Regime { Constant, Linear, Quadratic };

const char* to_string(Regime r) noexcept;

struct RegimeThresholds {
  double constant_max = 100.0;     ///< s <= this is Constant
  double quadratic_min = 30000.0;  ///< s > this is Quadratic
};

Regime regime_classify(double s, const RegimeThresholds& thresholds = {});

/// Prompt length at which beta s^2 equals alpha s.
double quadratic_crossover(const PrefillLatencyCoeffs<>& k);

struct GridPoint {
  double s = 1.0;
  double g = 0.0;
};

std::vector<GridPoint> make_grid(std::span<const double> s_values, std::span<const double> g_values);

/// Samples the polynomials on `plan` with multiplicative Gaussian noise of
/// relative std `noise`. Points with g = 0 use the prefill families, others
/// the decode families. Latency coefficients for every phase in the plan are
/// required; energy is attached when the matching energy family is present.
std::vector<LatencySample> synth_generate(const CoefficientSet& coeffs, std::span<const GridPoint> plan, double noise,
                                          std::uint64_t seed);

}  // namespace infercost
