#include "infercost/xformer_cost.hpp"

#include <algorithm>
#include <cmath>

#include "infercost/error.hpp"
#include "infercost/kv_config.hpp"
#include "infercost/phase_model.hpp"

namespace infercost {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

struct Widths {
  double layers, h, heads, kv, ffn, vocab, bpp, ffn_mats;
};

Widths widths(const ModelSpec& m) {
  const auto& d = m.dims();
  return {static_cast<double>(d.n_layers), static_cast<double>(d.hidden),  static_cast<double>(d.n_heads),
          static_cast<double>(m.kv_dim()), static_cast<double>(d.ffn_dim), static_cast<double>(d.vocab),
          d.bytes_per_param,               d.gated_ffn ? 3.0 : 2.0};
}

// Classes shared by prefill (rows = s) and a decode step (rows = 1). The
// attention class is supplied by the caller since it differs between phases.
std::vector<OpCost> token_costs(const ModelSpec& model, double rows, OpCost attention) {
  const auto w = widths(model);
  const double qkv_out = w.h + 2.0 * w.kv;
  const double norms = 2.0 * w.layers + 1.0;
  const double ffn_act = (w.ffn_mats == 3.0 ? 4.0 : 2.0) * rows * w.ffn;

  std::vector<OpCost> costs;
  costs.reserve(7);
  // The embedding table is streamed like any other weight; no gather credit.
  costs.emplace_back(0.0, (w.vocab * w.h + rows * w.h) * w.bpp, op_class::kEmbedding);
  costs.emplace_back(norms * kNormFlopsPerElement * rows * w.h, norms * (2.0 * rows * w.h + w.h) * w.bpp,
                     op_class::kNorm);
  costs.emplace_back(w.layers * matmul_flops(rows, qkv_out, w.h),
                     w.layers * (w.h * qkv_out + rows * w.h + rows * qkv_out) * w.bpp, op_class::kQkvProj);
  costs.push_back(std::move(attention));
  costs.emplace_back(w.layers * matmul_flops(rows, w.h, w.h), w.layers * (w.h * w.h + 2.0 * rows * w.h) * w.bpp,
                     op_class::kAttentionOut);
  costs.emplace_back(w.layers * w.ffn_mats * matmul_flops(rows, w.ffn, w.h),
                     w.layers * (w.ffn_mats * w.h * w.ffn + 2.0 * rows * w.h + ffn_act) * w.bpp, op_class::kFfn);
  costs.emplace_back(matmul_flops(rows, w.vocab, w.h), (w.h * w.vocab + rows * w.h + rows * w.vocab) * w.bpp,
                     op_class::kLmHead);
  return costs;
}

PhaseCostBreakdown finish(PhaseCostBreakdown b) {
  b.total_seconds = 0.0;
  double best = -1.0;
  for (const auto& c : b.classes) {
    b.total_seconds += c.seconds;
    if (c.seconds > best) {
      best = c.seconds;
      b.dominant_class = c.label;
    }
  }
  return b;
}

}  // namespace

ModelSpec::ModelSpec(ModelDims dims) : dims_(std::move(dims)) {
  if (dims_.kv_heads == 0) dims_.kv_heads = dims_.n_heads;
  require(dims_.n_layers > 0 && dims_.hidden > 0 && dims_.n_heads > 0 && dims_.head_dim > 0 && dims_.ffn_dim > 0 &&
              dims_.vocab > 0 && dims_.kv_heads > 0,
          "model '" + dims_.name + "': all dimensions must be positive");
  require(dims_.n_heads * dims_.head_dim == dims_.hidden,
          "model '" + dims_.name + "': n_heads * head_dim must equal hidden");
  require(dims_.n_heads % dims_.kv_heads == 0, "model '" + dims_.name + "': n_heads must be a multiple of kv_heads");
  require(std::isfinite(dims_.bytes_per_param) && dims_.bytes_per_param > 0.0,
          "model '" + dims_.name + "': bytes_per_param must be > 0");
}

ModelSpec ModelSpec::from_config(const KeyValueFile& config) {
  config.reject_unknown({"name", "n_layers", "hidden", "n_heads", "head_dim", "ffn_dim", "vocab", "bytes_per_param",
                         "kv_heads", "gated_ffn", "tied_embeddings"});
  ModelDims d;
  d.name = config.text_or("name").value_or("");
  d.n_layers = config.integer("n_layers");
  d.hidden = config.integer("hidden");
  d.n_heads = config.integer("n_heads");
  d.head_dim = config.integer("head_dim");
  d.ffn_dim = config.integer("ffn_dim");
  d.vocab = config.integer("vocab");
  d.bytes_per_param = config.number_or("bytes_per_param").value_or(4.0);
  d.kv_heads = config.integer_or("kv_heads").value_or(0);
  d.gated_ffn = config.boolean_or("gated_ffn", false);
  d.tied_embeddings = config.boolean_or("tied_embeddings", false);
  return ModelSpec(std::move(d));
}

ModelSpec ModelSpec::load(const std::filesystem::path& path) { return from_config(KeyValueFile::load(path)); }

double ModelSpec::block_params() const {
  const auto w = widths(*this);
  return w.h * (w.h + 2.0 * w.kv) + w.h * w.h + w.ffn_mats * w.h * w.ffn + 2.0 * w.h;
}

double ModelSpec::n_params() const {
  const auto w = widths(*this);
  const double embedding = w.vocab * w.h;
  const double head = dims_.tied_embeddings ? 0.0 : w.vocab * w.h;
  return w.layers * block_params() + embedding + head + w.h;
}

double ModelSpec::weight_bytes() const { return n_params() * dims_.bytes_per_param; }

bool is_matmul_class(const std::string& label) {
  return label == op_class::kQkvProj || label == op_class::kAttention || label == op_class::kAttentionOut ||
         label == op_class::kFfn || label == op_class::kLmHead;
}

double kv_cache_bytes(const ModelSpec& model, double context_len) {
  return 2.0 * context_len * static_cast<double>(model.n_layers()) * static_cast<double>(model.kv_dim()) *
         model.bytes_per_param();
}

std::vector<OpCost> prefill_costs(const ModelSpec& model, std::int64_t s) {
  require(s >= 1, "prefill needs s >= 1");
  const auto w = widths(model);
  const double sd = static_cast<double>(s);
  OpCost attention(w.layers * (2.0 * matmul_flops(sd, sd, w.h) + kSoftmaxFlopsPerScore * sd * sd * w.heads),
                   w.layers * (2.0 * sd * w.h + 2.0 * sd * w.kv) * w.bpp, op_class::kAttention);
  return token_costs(model, sd, std::move(attention));
}

std::vector<OpCost> decode_step_costs(const ModelSpec& model, std::int64_t context_len) {
  require(context_len >= 1, "decode step needs context_len >= 1");
  const auto w = widths(model);
  const double ctx = static_cast<double>(context_len);
  OpCost attention(w.layers * (2.0 * matmul_flops(1.0, ctx, w.h) + kSoftmaxFlopsPerScore * ctx * w.heads),
                   w.layers * 2.0 * w.h * w.bpp + kv_cache_bytes(model, ctx), op_class::kAttention);
  return token_costs(model, 1.0, std::move(attention));
}

const ClassCost& PhaseCostBreakdown::at(const std::string& label) const {
  for (const auto& c : classes) {
    if (c.label == label) return c;
  }
  throw Error(Errc::InvalidArgument, "no operation class '" + label + "'");
}

PhaseCostBreakdown predict_prefill_latency(const ModelSpec& model, const HardwareProfile& hw, std::int64_t s) {
  PhaseCostBreakdown b;
  for (auto& cost : prefill_costs(model, s)) {
    const double seconds = op_latency(cost, hw);
    auto label = cost.label();
    b.classes.push_back({std::move(label), std::move(cost), seconds});
  }
  return finish(std::move(b));
}

PhaseCostBreakdown predict_decode_latency(const ModelSpec& model, const HardwareProfile& hw, std::int64_t s,
                                          std::int64_t g) {
  require(s >= 1 && g >= 1, "decode needs s >= 1 and g >= 1");
  PhaseCostBreakdown b;
  for (std::int64_t t = 1; t <= g; ++t) {
    const auto step = decode_step_costs(model, s + t - 1);
    if (b.classes.empty()) {
      for (const auto& cost : step) b.classes.push_back({cost.label(), cost, op_latency(cost, hw)});
      continue;
    }
    for (std::size_t i = 0; i < step.size(); ++i) {
      b.classes[i].cost = b.classes[i].cost.merged(step[i]);
      b.classes[i].seconds += op_latency(step[i], hw);
    }
  }
  return finish(std::move(b));
}

std::vector<ScalingRow> size_scaling_curve(std::span<const ModelSpec> models, const HardwareProfile& hw,
                                           std::int64_t s, std::int64_t g) {
  require(!models.empty(), "size_scaling_curve needs at least one model");
  std::vector<ScalingRow> rows;
  rows.reserve(models.size());
  for (const auto& m : models) {
    const double seconds = predict_decode_latency(m, hw, s, g).total_seconds;
    rows.push_back({m.name(), m.n_params(), m.hidden(), m.n_layers(), seconds,
                    energy_from_power(Phase::Decode, seconds, hw)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScalingRow& a, const ScalingRow& b) { return a.n_params < b.n_params; });
  return rows;
}

}  // namespace infercost
