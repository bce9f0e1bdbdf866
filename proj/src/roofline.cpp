#include "infercost/roofline.hpp"

#include <algorithm>
#include <cmath>

#include "infercost/error.hpp"
#include "infercost/kv_config.hpp"

namespace infercost {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

HardwareProfile::HardwareProfile(std::string name, double f_max, double b_max, double p_prefill, double p_decode,
                                 double mu_comp, double mu_mem)
    : name_(std::move(name)),
      f_max_(f_max),
      b_max_(b_max),
      p_prefill_(p_prefill),
      p_decode_(p_decode),
      mu_comp_(mu_comp),
      mu_mem_(mu_mem) {
  require(positive(f_max_), "f_max must be > 0");
  require(positive(b_max_), "b_max must be > 0");
  require(positive(p_prefill_), "p_prefill must be > 0");
  require(positive(p_decode_), "p_decode must be > 0");
  require(positive(mu_comp_) && mu_comp_ <= 1.0, "mu_comp must lie in (0, 1]");
  require(positive(mu_mem_) && mu_mem_ <= 1.0, "mu_mem must lie in (0, 1]");
}

HardwareProfile HardwareProfile::from_config(const KeyValueFile& config) {
  config.reject_unknown({"name", "f_max", "b_max", "mu_comp", "mu_mem", "p_prefill", "p_decode"});
  return HardwareProfile(config.text_or("name").value_or(""), config.number("f_max"), config.number("b_max"),
                         config.number("p_prefill"), config.number("p_decode"),
                         config.number_or("mu_comp").value_or(kDefaultComputeEfficiency),
                         config.number_or("mu_mem").value_or(kDefaultMemoryEfficiency));
}

HardwareProfile HardwareProfile::load(const std::filesystem::path& path) {
  return from_config(KeyValueFile::load(path));
}

Ceilings effective_ceilings(const HardwareProfile& hw) {
  return {hw.mu_comp() * hw.f_max(), hw.mu_mem() * hw.b_max()};
}

OpCost::OpCost(double flops, double bytes, std::string label)
    : flops_(flops), bytes_(bytes), label_(std::move(label)) {
  require(std::isfinite(flops_) && flops_ >= 0.0, "OpCost flops must be finite and >= 0");
  require(std::isfinite(bytes_) && bytes_ >= 0.0, "OpCost bytes must be finite and >= 0");
  require(flops_ > 0.0 || bytes_ > 0.0, "OpCost '" + label_ + "' has neither flops nor bytes");
}

OpCost OpCost::merged(const OpCost& other) const {
  return OpCost(flops_ + other.flops_, bytes_ + other.bytes_, label_);
}

OpCost OpCost::scaled(double factor) const {
  require(positive(factor), "scale factor must be > 0");
  return OpCost(flops_ * factor, bytes_ * factor, label_);
}

const char* to_string(Boundedness b) noexcept {
  switch (b) {
    case Boundedness::ComputeBound: return "compute";
    case Boundedness::MemoryBound: return "memory";
    case Boundedness::Balanced: return "balanced";
  }
  return "?";
}

double op_latency(const OpCost& cost, const HardwareProfile& hw) {
  const auto eff = effective_ceilings(hw);
  return std::max(cost.flops() / eff.flops_per_s, cost.bytes() / eff.bytes_per_s);
}

Boundedness boundedness(const OpCost& cost, const HardwareProfile& hw) {
  const auto eff = effective_ceilings(hw);
  const double compute = cost.flops() / eff.flops_per_s;
  const double memory = cost.bytes() / eff.bytes_per_s;
  if (compute > memory) return Boundedness::ComputeBound;
  if (compute < memory) return Boundedness::MemoryBound;
  return Boundedness::Balanced;
}

double total_latency(std::span<const OpCost> costs, const HardwareProfile& hw) {
  double total = 0.0;
  for (const auto& c : costs) total += op_latency(c, hw);
  return total;
}

}  // namespace infercost
