// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unistd.h>

#include "infercost/bundled.hpp"
#include "infercost/cli.hpp"
#include "infercost/estimator.hpp"
#include "infercost/numerics.hpp"
#include "infercost/phase_model.hpp"
#include "infercost/trace.hpp"
#include "infercost/xformer_cost.hpp"

using namespace infercost;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const char* fmt, auto... args) {
    char buf[256];
    if constexpr (sizeof...(args) == 0) {
      std::snprintf(buf, sizeof buf, "%s", fmt);
    } else {
      std::snprintf(buf, sizeof buf, fmt, args...);
    }
    if (!detail.empty()) detail += "; ";
    detail += buf;
    if (!ok) {
      detail += " [x]";
      pass = false;
    }
  }
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string data(const char* f) { return std::string(INFERCOST_DATA_DIR) + "/" + f; }

const CoefficientSet& reference() {
  static const CoefficientSet set = bundled::reference_coefficients();
  return set;
}

Outcome polynomial_reproduction() {
  Outcome o;
  const double pre = eval_prefill_latency(*reference().prefill_latency, 1000.0);
  const double dec = eval_decode_latency(*reference().decode_latency, 1000.0, 100.0);
  o.check(std::abs(pre - 0.3465) <= 1e-4, "prefill(1000) = %.6f s (target 0.3465)", pre);
  o.check(std::abs(dec - 2.6430) <= 1e-4, "decode(1000,100) = %.6f s (target 2.6430)", dec);
  return o;
}

Outcome power_consistency() {
  Outcome o;
  const auto& k = reference();
  const auto r = consistency_report(*k.prefill_latency, *k.decode_latency, *k.prefill_energy, *k.decode_energy,
                                    bundled::h100_profile());
  for (const auto& e : r.entries) {
    if (e.energy_coeff == "A" || e.energy_coeff == "C") {
      o.check(std::abs(e.deviation) <= 0.02 && !e.flagged, "%s vs %s: implied %.4g, deviation %.2f%%",
              e.energy_coeff.c_str(), e.latency_coeff.c_str(), e.implied, 100.0 * e.deviation);
    }
    if (e.energy_coeff == "D") {
      o.check(e.flagged && e.fitted / e.implied > 5.0, "D vs theta flagged, ratio %.2fx", e.fitted / e.implied);
    }
  }
  return o;
}

std::vector<GridPoint> grid_200() {
  std::vector<double> s, g{0, 16, 48, 80, 112, 144, 176, 208, 240, 256};
  for (int v = 100; v <= 4000; v += 205) s.push_back(v);
  return make_grid(s, g);
}

Outcome fit_recovery_noiseless() {
  Outcome o;
  const auto plan = grid_200();
  const auto samples = synth_generate(reference(), plan, 0.0, 1);
  const auto pl = fit_prefill_latency(samples).coeffs;
  const auto dl = fit_decode_latency(samples).coeffs;
  const auto pe = fit_prefill_energy(samples).coeffs;
  const auto de = fit_decode_energy(samples).coeffs;
  const auto& k = reference();
  const double worst = std::max(
      {rel(pl.alpha, k.prefill_latency->alpha), rel(pl.beta, k.prefill_latency->beta),
       rel(pl.gamma, k.prefill_latency->gamma), rel(dl.eta, k.decode_latency->eta),
       rel(dl.theta, k.decode_latency->theta), rel(dl.phi, k.decode_latency->phi), rel(dl.rho, k.decode_latency->rho),
       rel(pe.a, k.prefill_energy->a), rel(pe.b, k.prefill_energy->b), rel(de.c, k.decode_energy->c),
       rel(de.d, k.decode_energy->d), rel(de.g_intercept, k.decode_energy->g_intercept)});
  o.check(plan.size() == 200, "%zu grid points", plan.size());
  o.check(worst < 1e-6, "worst relative error over 12 coefficients %.2e", worst);
  return o;
}

Outcome fit_recovery_noisy() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> s_dist(100, 4000), g_dist(4, 256);
  std::vector<GridPoint> prefill_plan, decode_plan;
  for (int i = 0; i < 500; ++i) {
    prefill_plan.push_back({std::round(s_dist(rng)), 0.0});
    decode_plan.push_back({std::round(s_dist(rng)), std::round(g_dist(rng))});
  }
  const auto pre = synth_generate(reference(), prefill_plan, 0.01, 11);
  const auto dec = synth_generate(reference(), decode_plan, 0.01, 12);
  const double ea = rel(fit_prefill_latency(pre).coeffs.alpha, reference().prefill_latency->alpha);
  const double ee = rel(fit_decode_latency(dec).coeffs.eta, reference().decode_latency->eta);
  const double eA = rel(fit_prefill_energy(pre).coeffs.a, reference().prefill_energy->a);
  const double eC = rel(fit_decode_energy(dec).coeffs.c, reference().decode_energy->c);
  o.check(ea < 0.05, "alpha %.2f%%", 100 * ea);
  o.check(ee < 0.05, "eta %.2f%%", 100 * ee);
  o.check(eA < 0.05, "A %.2f%%", 100 * eA);
  o.check(eC < 0.05, "C %.2f%%", 100 * eC);
  return o;
}

Outcome analytic_sanity() {
  Outcome o;
  const auto m = bundled::llama8b_spec();
  const auto hw = bundled::h100_profile();
  const double slope =
      (predict_prefill_latency(m, hw, 1001).total_seconds - predict_prefill_latency(m, hw, 999).total_seconds) / 2.0;
  const double per_token = predict_decode_latency(m, hw, 1000, 100).total_seconds / 100.0;
  o.check(rel(slope, 3.18e-4) <= 0.25, "prefill slope %.4g s/token (%.1f%% off)", slope, 100 * rel(slope, 3.18e-4));
  o.check(rel(per_token, 2.61e-2) <= 0.25, "decode %.4g s/token (%.1f%% off)", per_token,
          100 * rel(per_token, 2.61e-2));
  bool decode_mem = true, prefill_comp = true;
  for (const auto& c : decode_step_costs(m, 1000)) decode_mem &= boundedness(c, hw) == Boundedness::MemoryBound;
  for (const auto& c : prefill_costs(m, 1000)) {
    if (is_matmul_class(c.label())) prefill_comp &= boundedness(c, hw) == Boundedness::ComputeBound;
  }
  o.check(decode_mem, "decode classes memory-bound");
  o.check(prefill_comp, "prefill matmuls compute-bound");
  return o;
}

Outcome decomposition_oracle() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RunRecord> records;
  std::vector<ComponentWh> truth;
  for (int p = 0; p < 200; ++p) {
    ComponentWh prefill, decode;
    prefill << 0.1 * u(rng), 0.01 * u(rng), 0.01 * u(rng);
    decode << 0.5 * u(rng), 0.05 * u(rng), 0.05 * u(rng);
    truth.push_back(decode);
    for (int k = 0; k < 10; ++k) {
      RunRecord pre{"p" + std::to_string(p), RunKind::PrefillOnly, 500, 1, 0.2, prefill};
      RunRecord full{"p" + std::to_string(p), RunKind::Full, 500, 80, 2.0, prefill + decode};
      records.push_back(pre);
      records.push_back(full);
    }
  }
  records.push_back({"only_full", RunKind::Full, 10, 5, 0.5, ComponentWh(0.1, 0.01, 0.01)});
  records.push_back({"only_prefill", RunKind::PrefillOnly, 10, 1, 0.1, ComponentWh(0.05, 0.01, 0.01)});
  const auto d = decompose(records);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.prompts.size() && i < truth.size(); ++i) {
    worst = std::max(worst, (d.prompts[i].decode_wh - truth[i]).abs().maxCoeff());
  }
  o.check(d.prompts.size() == 200 && worst <= 1e-12, "%zu prompts, max decode error %.1e Wh", d.prompts.size(), worst);
  const bool missing_ok = d.missing.size() == 2 && d.missing[0].prompt_id == "only_full" &&
                          d.missing[0].missing == RunKind::PrefillOnly && d.missing[1].prompt_id == "only_prefill" &&
                          d.missing[1].missing == RunKind::Full;
  o.check(missing_ok, "%zu groups reported MissingKind, none fabricated", d.missing.size());
  return o;
}

Outcome statistics_fixture() {
  Outcome o;
  std::ifstream in(data("thank_you_trace.csv"));
  const auto parsed = parse_records(in, TraceFormat::Delimited);
  const auto s = aggregate(parsed.records, EnergyPhase::Full);
  const double g = s[Component::Gpu].mean, c = s[Component::Cpu].mean, r = s[Component::Ram].mean;
  o.check(parsed.errors.empty(), "%zu records", parsed.records.size());
  o.check(std::abs(g - 0.202) < 1e-12 && std::abs(c - 0.024) < 1e-12 && std::abs(r - 0.019) < 1e-12,
          "means %.15g / %.15g / %.15g Wh", g, c, r);
  o.check(std::abs(s.total_mean - 0.245) < 1e-12, "total %.15g Wh", s.total_mean);
  const double led = led_equivalent_minutes(0.245);
  o.check(std::abs(led - 2.94) <= 0.01, "LED %.4f min", led);
  return o;
}

Outcome regime_boundary() {
  Outcome o;
  const double x = quadratic_crossover(*reference().prefill_latency);
  o.check(std::abs(x - 27180) <= 1.0 && x < RegimeThresholds{}.quadratic_min, "crossover %.1f tokens < 30000", x);
  o.check(regime_classify(50) == Regime::Constant && regime_classify(2000) == Regime::Linear &&
              regime_classify(40000) == Regime::Quadratic,
          "50/2000/40000 -> %s/%s/%s", to_string(regime_classify(50)), to_string(regime_classify(2000)),
          to_string(regime_classify(40000)));
  return o;
}

ModelSpec family_member(std::int64_t hidden, std::int64_t layers) {
  return ModelSpec(ModelDims{"h" + std::to_string(hidden), layers, hidden, hidden / 64, 64, 4 * hidden, 32000});
}

Outcome scaling_law() {
  Outcome o;
  const auto hw = bundled::h100_profile();
  const std::vector<std::int64_t> widths{2048, 4096, 8192, 16384};
  Eigen::MatrixXd x(widths.size(), 2);
  Eigen::VectorXd y(widths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) {
    x.row(i) << std::log(double(widths[i])), 1.0;
    y(i) = std::log(predict_prefill_latency(family_member(widths[i], 32), hw, 256).total_seconds);
  }
  const double slope = ols_fit(x, y).coefficients(0);
  o.check(std::abs(slope - 2.0) <= 0.1, "prefill log-log slope vs h %.3f", slope);
  const auto one = predict_decode_latency(family_member(4096, 32), hw, 512, 64);
  const auto two = predict_decode_latency(family_member(4096, 64), hw, 512, 64);
  o.check(two.total_seconds == 2.0 * one.total_seconds, "decode latency ratio at 2N %.6f", two.total_seconds / one.total_seconds);
  double layer_one = 0.0, layer_two = 0.0;
  for (const char* c : {op_class::kQkvProj, op_class::kAttention, op_class::kAttentionOut, op_class::kFfn}) {
    layer_one += one.at(c).seconds;
    layer_two += two.at(c).seconds;
  }
  char note[96];
  std::snprintf(note, sizeof note, "per-layer classes ratio %.12f", layer_two / layer_one);
  o.detail += std::string("; ") + note;
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / ("infercost_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto trace = (dir / "trace.csv").string();
  const auto coeffs = (dir / "fit.coeffs").string();
  std::ostringstream sink, err;
  auto cli = [&](std::vector<std::string> args, std::ostream& out) { return cli_dispatch(args, out, err); };
  o.check(cli({"synth", "--s", "100:4000:150", "--g", "8:256:31", "--runs", "2", "--out", trace}, sink) == 0,
          "synth");
  o.check(cli({"fit", "--trace", trace, "--out", coeffs}, sink) == 0, "fit");
  std::ostringstream predicted;
  o.check(cli({"--format", "json", "predict", "--coeffs", coeffs, "--workload-trace", trace}, predicted) == 0,
          "predict");
  if (!o.pass) {
    o.detail += " " + err.str();
    return o;
  }
  const double got = nlohmann::json::parse(predicted.str()).at("mean").at(0).at("total_wh").get<double>();
  // The generator's mean interaction energy: noiseless full-run energy is the polynomial sum.
  std::ifstream in(trace);
  double sum = 0.0, n = 0.0;
  const auto& k = reference();
  for (const auto& r : parse_records(in, TraceFormat::Delimited).records) {
    if (r.run_kind != RunKind::Full) continue;
    const double s = double(r.input_tokens), g = double(r.output_tokens);
    sum += eval_prefill_energy(*k.prefill_energy, s) + eval_decode_energy(*k.decode_energy, s, g);
    n += 1.0;
  }
  const double want = sum / n;
  o.check(rel(got, want) <= 0.02, "predicted %.6f Wh vs generator %.6f Wh (%.2e rel)", got, want, rel(got, want));
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"polynomial reproduction", polynomial_reproduction},
      {"power consistency", power_consistency},
      {"fit recovery (noiseless)", fit_recovery_noiseless},
      {"fit recovery (1% noise)", fit_recovery_noisy},
      {"analytic roofline sanity", analytic_sanity},
      {"decomposition oracle", decomposition_oracle},
      {"statistics fixture", statistics_fixture},
      {"regime boundary", regime_boundary},
      {"scaling law", scaling_law},
      {"end-to-end pipeline", end_to_end},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %2zu  %-26s %s (%.0f ms)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                ms);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
