#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "infercost/roofline.hpp"

namespace infercost {

class KeyValueFile;

/// Decoder-only transformer dimensions.
struct ModelDims {
  std::string name;
  std::int64_t n_layers = 0;
  std::int64_t hidden = 0;
  std::int64_t n_heads = 0;
  std::int64_t head_dim = 0;
  std::int64_t ffn_dim = 0;
  std::int64_t vocab = 0;
  double bytes_per_param = 4.0;
  std::int64_t kv_heads = 0;     ///< 0 means n_heads (no grouped-query attention)
  bool gated_ffn = false;        ///< three FFN matrices (SwiGLU) instead of two
  bool tied_embeddings = false;  ///< LM head shares the embedding table
};

/// Validated, immutable model description.
class ModelSpec {
 public:
  explicit ModelSpec(ModelDims dims);

  /// Keys: the ModelDims field names. kv_heads, gated_ffn, tied_embeddings
  /// and bytes_per_param are optional.
  static ModelSpec from_config(const KeyValueFile& config);
  static ModelSpec load(const std::filesystem::path& path);

  const ModelDims& dims() const { return dims_; }
  const std::string& name() const { return dims_.name; }
  std::int64_t n_layers() const { return dims_.n_layers; }
  std::int64_t hidden() const { return dims_.hidden; }
  std::int64_t kv_heads() const { return dims_.kv_heads; }
  /// Width of the K (or V) projection: kv_heads * head_dim.
  std::int64_t kv_dim() const { return dims_.kv_heads * dims_.head_dim; }
  double bytes_per_param() const { return dims_.bytes_per_param; }

  /// Weights of one transformer block (attention, FFN, two norms).
  double block_params() const;
  /// Total parameter count including embedding and LM head.
  double n_params() const;
  /// n_params * bytes_per_param.
  double weight_bytes() const;

 private:
  ModelDims dims_;
};

/// FLOPs of an (m x k) by (k x n) product: one multiply and one add per term.
constexpr double matmul_flops(double m, double n, double k) { return 2.0 * m * n * k; }

/// Softmax cost per attention score (max, subtract, exp, sum, divide).
inline constexpr double kSoftmaxFlopsPerScore = 5.0;
/// RMSNorm cost per element (square, accumulate, scale, weight).
inline constexpr double kNormFlopsPerElement = 4.0;

/// Operation class labels, in emission order.
namespace op_class {
inline constexpr const char* kEmbedding = "embedding";
inline constexpr const char* kNorm = "norm";
inline constexpr const char* kQkvProj = "qkv_proj";
inline constexpr const char* kAttention = "attn";
inline constexpr const char* kAttentionOut = "attn_out";
inline constexpr const char* kFfn = "ffn";
inline constexpr const char* kLmHead = "lm_head";
}  // namespace op_class

/// True for the classes executed as matrix products.
bool is_matmul_class(const std::string& label);

/// Bytes of cached keys and values read at context length `context_len`.
double kv_cache_bytes(const ModelSpec& model, double context_len);

/// Per-class costs of a prefill over `s` prompt tokens, each class summed
/// over all layers. Weights are streamed once per op and activations once
/// in each direction; attention scores are never materialized.
std::vector<OpCost> prefill_costs(const ModelSpec& model, std::int64_t s);

/// Per-class costs of generating one token against `context_len` cached
/// positions.
std::vector<OpCost> decode_step_costs(const ModelSpec& model, std::int64_t context_len);

struct ClassCost {
  std::string label;
  OpCost cost;
  double seconds = 0.0;
};

struct PhaseCostBreakdown {
  std::vector<ClassCost> classes;
  double total_seconds = 0.0;
  std::string dominant_class;

  const ClassCost& at(const std::string& label) const;
};

PhaseCostBreakdown predict_prefill_latency(const ModelSpec& model, const HardwareProfile& hw, std::int64_t s);

/// Sum over t = 1..g of one decode step at context s + t - 1.
PhaseCostBreakdown predict_decode_latency(const ModelSpec& model, const HardwareProfile& hw, std::int64_t s,
                                          std::int64_t g);

struct ScalingRow {
  std::string name;
  double n_params = 0.0;
  std::int64_t hidden = 0;
  std::int64_t n_layers = 0;
  double decode_seconds = 0.0;
  double decode_wh = 0.0;
};

/// Predicted decode energy per model at fixed (s, g), ordered by n_params.
std::vector<ScalingRow> size_scaling_curve(std::span<const ModelSpec> models, const HardwareProfile& hw,
                                           std::int64_t s, std::int64_t g);

}  // namespace infercost
