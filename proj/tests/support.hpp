#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace testing {

inline std::string data_path(const std::string& file) { return std::string(INFERCOST_DATA_DIR) + "/" + file; }

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Small hand-rolled generator for property tests; fixed seeds keep runs reproducible.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing
