#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace infercost {

class KeyValueFile;

/// Efficiency factors applied when a profile does not set its own. Calibrated
/// for an 8B-parameter FP32 model on an H100 SXM.
inline constexpr double kDefaultComputeEfficiency = 0.675;
inline constexpr double kDefaultMemoryEfficiency = 0.443;

/// Hardware ceilings plus mean per-phase board power. Immutable; every field
/// is validated at construction.
class HardwareProfile {
 public:
  HardwareProfile(std::string name, double f_max, double b_max, double p_prefill, double p_decode,
                  double mu_comp = kDefaultComputeEfficiency, double mu_mem = kDefaultMemoryEfficiency);

  /// Keys: name, f_max, b_max, mu_comp, mu_mem, p_prefill, p_decode.
  /// mu_comp / mu_mem are optional.
  static HardwareProfile from_config(const KeyValueFile& config);
  static HardwareProfile load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  double f_max() const { return f_max_; }  ///< FLOP/s
  double b_max() const { return b_max_; }  ///< bytes/s
  double mu_comp() const { return mu_comp_; }
  double mu_mem() const { return mu_mem_; }
  double p_prefill() const { return p_prefill_; }  ///< W
  double p_decode() const { return p_decode_; }    ///< W

 private:
  std::string name_;
  double f_max_;
  double b_max_;
  double p_prefill_;
  double p_decode_;
  double mu_comp_;
  double mu_mem_;
};

struct Ceilings {
  double flops_per_s;
  double bytes_per_s;
};

Ceilings effective_ceilings(const HardwareProfile& hw);

/// FLOP count and device-memory traffic of one kernel-level operation.
class OpCost {
 public:
  OpCost(double flops, double bytes, std::string label = {});

  double flops() const { return flops_; }
  double bytes() const { return bytes_; }
  const std::string& label() const { return label_; }

  /// Sum of two costs, keeping this label.
  OpCost merged(const OpCost& other) const;
  /// Both counts multiplied by `factor` (> 0).
  OpCost scaled(double factor) const;

 private:
  double flops_;
  double bytes_;
  std::string label_;
};

enum class Boundedness { ComputeBound, MemoryBound, Balanced };

const char* to_string(Boundedness b) noexcept;

/// max(flops / F_eff, bytes / B_eff), in seconds.
double op_latency(const OpCost& cost, const HardwareProfile& hw);

/// Exact comparison of the two single-resource times; ties are Balanced.
Boundedness boundedness(const OpCost& cost, const HardwareProfile& hw);

/// Sum of per-op latencies; no compute/memory overlap between ops.
double total_latency(std::span<const OpCost> costs, const HardwareProfile& hw);

}  // namespace infercost
