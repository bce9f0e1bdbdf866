#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "infercost/bundled.hpp"
#include "infercost/error.hpp"
#include "infercost/kv_config.hpp"
#include "infercost/phase_model.hpp"
#include "support.hpp"

using namespace infercost;
using testing::rel_err;

namespace {

// Reference values, typed in here independently of the bundled file.
const PrefillLatencyCoeffs<> kPL{3.18e-4, 1.17e-8, 1.68e-2};
const DecodeLatencyCoeffs<> kDL{2.61e-2, 3.31e-7, 5.86e-8, -5.32e-2};
const PrefillEnergyCoeffs<> kPE{6.05e-5, 5.00e-3};
const DecodeEnergyCoeffs<> kDE{2.13e-3, 2.87e-7, -4.71e-3};

CoefficientSet reference_set() { return {kPL, kDL, kPE, kDE}; }

std::vector<GridPoint> standard_plan() {
  std::vector<double> s, g{0.0};
  for (int v = 100; v <= 4000; v += 100) s.push_back(v);
  for (int v = 16; v <= 256; v += 16) g.push_back(v);
  return make_grid(s, g);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an infercost::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("bundled coefficients match the reference values") {
  const auto set = bundled::reference_coefficients();
  REQUIRE(set.prefill_latency);
  REQUIRE(set.decode_latency);
  REQUIRE(set.prefill_energy);
  REQUIRE(set.decode_energy);
  CHECK(set.prefill_latency->alpha == kPL.alpha);
  CHECK(set.prefill_latency->beta == kPL.beta);
  CHECK(set.prefill_latency->gamma == kPL.gamma);
  CHECK(set.decode_latency->eta == kDL.eta);
  CHECK(set.decode_latency->theta == kDL.theta);
  CHECK(set.decode_latency->phi == kDL.phi);
  CHECK(set.decode_latency->rho == kDL.rho);
  CHECK(set.prefill_energy->a == kPE.a);
  CHECK(set.prefill_energy->b == kPE.b);
  CHECK(set.decode_energy->c == kDE.c);
  CHECK(set.decode_energy->d == kDE.d);
  CHECK(set.decode_energy->g_intercept == kDE.g_intercept);

  const auto file = CoefficientSet::load(testing::data_path("reference.coeffs"));
  CHECK(file.decode_latency->rho == kDL.rho);
}

TEST_CASE("prefill latency evaluation") {
  CHECK(std::abs(eval_prefill_latency(kPL, 1000.0) - 0.3465) < 1e-4);
  CHECK(std::abs(eval_prefill_latency(kPL, 1000.0) - (0.318 + 0.0117 + 0.0168)) < 1e-12);
  CHECK(eval_prefill_latency(kPL, 0.0) == kPL.gamma);
}

TEST_CASE("decode latency evaluation") {
  // 0.0261*100 + 3.31e-7*1e5 + 5.86e-8*1e4 - 0.0532
  CHECK(std::abs(eval_decode_latency(kDL, 1000.0, 100.0) - 2.590486) < 1e-9);
  const auto small = checked_decode_latency(kDL, 1.0, 1.0);
  CHECK(small.out_of_range);
  CHECK(small.value < 0.0);
  CHECK(code_of([] { checked_decode_latency(kDL, 0.0, 1.0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { checked_decode_latency(kDL, 10.0, 0.0); }) == Errc::InvalidArgument);
}

TEST_CASE("energy evaluation") {
  CHECK(std::abs(eval_prefill_energy(kPE, 1000.0) - 6.55e-2) < 1e-12);
  CHECK(std::abs(eval_decode_energy(kDE, 1000.0, 100.0) - 0.2370) < 1e-4);
  CHECK(std::abs(eval_decode_energy(kDE, 100.0, 100.0) - 0.2111) < 1e-4);
  const auto neg = checked_decode_energy(kDE, 1.0, 1.0);
  CHECK(neg.out_of_range);
  CHECK_FALSE(checked_prefill_energy(kPE, 1000.0).out_of_range);
}

TEST_CASE("evaluators accept Eigen arrays") {
  Eigen::ArrayXd s(3), g(3);
  s << 100, 1000, 4000;
  g << 16, 100, 256;
  const Eigen::ArrayXd t = eval_decode_latency(kDL, s, g);
  for (int i = 0; i < 3; ++i) CHECK(t(i) == eval_decode_latency(kDL, s(i), g(i)));
  const Eigen::ArrayXd e = eval_prefill_energy(kPE, s);
  CHECK(e(1) == eval_prefill_energy(kPE, 1000.0));
}

TEST_CASE("energy from power") {
  const auto hw = bundled::h100_profile();
  CHECK(energy_from_power(Phase::Prefill, 3600.0, hw) == 684.0);
  CHECK(energy_from_power(Phase::Decode, 3600.0, hw) == 293.0);
  CHECK(energy_from_power(Phase::Prefill, 0.0, hw) == 0.0);
  const double wh = energy_from_power(Phase::Prefill, eval_prefill_latency(kPL, 1000.0), hw);
  CHECK(std::abs(wh - 6.58e-2) < 1e-4);
  CHECK(rel_err(wh, eval_prefill_energy(kPE, 1000.0)) < 0.01);
  CHECK_THROWS_AS(energy_from_power(Phase::Decode, -1.0, hw), Error);
  testing::Gen gen(31);
  for (int i = 0; i < 100; ++i) {
    const double a = gen.uniform(0, 100), b = gen.uniform(0, 100);
    CHECK(energy_from_power(Phase::Decode, a + b, hw) ==
          doctest::Approx(energy_from_power(Phase::Decode, a, hw) + energy_from_power(Phase::Decode, b, hw)));
  }
}

TEST_CASE("consistency report on reference values") {
  const auto r = consistency_report(kPL, kDL, kPE, kDE, bundled::h100_profile());
  REQUIRE(r.entries.size() == 5);
  auto find = [&](const std::string& name) {
    for (const auto& e : r.entries)
      if (e.energy_coeff == name) return e;
    FAIL("missing entry " << name);
    return ConsistencyEntry{};
  };
  const auto a = find("A");
  CHECK(std::abs(a.implied - 684.0 * 3.18e-4 / 3600.0) < 1e-15);
  CHECK(std::abs(a.implied - 6.042e-5) < 1e-8);
  CHECK(std::abs(a.deviation) < 0.02);
  CHECK_FALSE(a.flagged);
  const auto c = find("C");
  CHECK(std::abs(c.implied - 2.124e-3) < 1e-6);
  CHECK(std::abs(c.deviation) < 0.02);
  CHECK_FALSE(c.flagged);
  const auto d = find("D");
  CHECK(std::abs(d.implied - 2.69e-8) < 1e-10);
  CHECK(d.flagged);
  CHECK(d.deviation > 8.0);
  const auto b = find("B");
  CHECK(b.flagged);
  CHECK(std::abs(std::abs(b.deviation) - 0.566) < 0.01);
  CHECK(r.any_flagged());
}

TEST_CASE("regimes") {
  CHECK(regime_classify(50) == Regime::Constant);
  CHECK(regime_classify(100) == Regime::Constant);
  CHECK(regime_classify(2000) == Regime::Linear);
  CHECK(regime_classify(30000) == Regime::Linear);
  CHECK(regime_classify(40000) == Regime::Quadratic);
  CHECK(regime_classify(500, {1000, 2000}) == Regime::Constant);
  const double x = quadratic_crossover(kPL);
  CHECK(std::abs(x - 3.18e-4 / 1.17e-8) < 1e-9);
  CHECK(std::abs(x - 27180) <= 1.0);
  CHECK(x < RegimeThresholds{}.quadratic_min);
  CHECK_THROWS_AS(regime_classify(-1.0), Error);
}

TEST_CASE("noiseless fits recover the reference coefficients") {
  const auto samples = synth_generate(reference_set(), standard_plan(), 0.0, 1);
  const auto pl = fit_prefill_latency(samples);
  const auto dl = fit_decode_latency(samples);
  const auto pe = fit_prefill_energy(samples);
  const auto de = fit_decode_energy(samples);
  CHECK(rel_err(pl.coeffs.alpha, kPL.alpha) < 1e-6);
  CHECK(rel_err(pl.coeffs.beta, kPL.beta) < 1e-6);
  CHECK(rel_err(pl.coeffs.gamma, kPL.gamma) < 1e-6);
  CHECK(rel_err(dl.coeffs.eta, kDL.eta) < 1e-6);
  CHECK(rel_err(dl.coeffs.theta, kDL.theta) < 1e-6);
  CHECK(rel_err(dl.coeffs.phi, kDL.phi) < 1e-6);
  CHECK(rel_err(dl.coeffs.rho, kDL.rho) < 1e-6);
  CHECK(rel_err(pe.coeffs.a, kPE.a) < 1e-6);
  CHECK(rel_err(pe.coeffs.b, kPE.b) < 1e-6);
  CHECK(rel_err(de.coeffs.c, kDE.c) < 1e-6);
  CHECK(rel_err(de.coeffs.d, kDE.d) < 1e-6);
  CHECK(rel_err(de.coeffs.g_intercept, kDE.g_intercept) < 1e-6);
  CHECK(pl.valid);
  CHECK(dl.valid);
  CHECK(pl.fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("noisy fits: 1% noise, 500 points") {
  testing::Gen gen(32);
  std::vector<GridPoint> prefill_plan, decode_plan;
  for (int i = 0; i < 500; ++i) {
    prefill_plan.push_back({std::round(gen.uniform(100, 4000)), 0.0});
    decode_plan.push_back({std::round(gen.uniform(100, 4000)), std::round(gen.uniform(4, 256))});
  }
  const auto pre = synth_generate(reference_set(), prefill_plan, 0.01, 7);
  const auto dec = synth_generate(reference_set(), decode_plan, 0.01, 8);
  CHECK(rel_err(fit_prefill_latency(pre).coeffs.alpha, kPL.alpha) < 0.05);
  CHECK(rel_err(fit_decode_latency(dec).coeffs.eta, kDL.eta) < 0.05);
  CHECK(rel_err(fit_prefill_energy(pre).coeffs.a, kPE.a) < 0.05);
  CHECK(rel_err(fit_decode_energy(dec).coeffs.c, kDE.c) < 0.05);
}

TEST_CASE("fit preconditions") {
  const std::vector<LatencySample> two{{100, 0, 0.1, {}}, {200, 0, 0.2, {}}};
  CHECK(code_of([&] { fit_prefill_latency(two); }) == Errc::InsufficientSamples);
  CHECK(code_of([&] { fit_decode_latency(two); }) == Errc::InsufficientSamples);
  std::vector<LatencySample> same_g;
  for (int s = 100; s <= 1000; s += 100) same_g.push_back({double(s), 64, eval_decode_latency(kDL, s, 64.0), {}});
  CHECK(code_of([&] { fit_decode_latency(same_g); }) == Errc::RankDeficient);
  std::vector<LatencySample> same_s;
  for (int i = 0; i < 5; ++i) same_s.push_back({500, 0, 0.2, {}});
  CHECK(code_of([&] { fit_prefill_latency(same_s); }) == Errc::RankDeficient);
  const std::vector<LatencySample> bad{{0.0, 0, 0.1, {}}};
  CHECK(code_of([&] { fit_prefill_latency(bad); }) == Errc::InvalidArgument);
}

TEST_CASE("constant energy gives zero slope") {
  std::vector<LatencySample> v;
  for (int s = 100; s <= 1000; s += 100) v.push_back({double(s), 0, 0.1, 0.05});
  const auto f = fit_prefill_energy(v);
  CHECK(std::abs(f.coeffs.a) < 1e-15);
  CHECK(f.coeffs.b == doctest::Approx(0.05));
}

TEST_CASE("fits flag sign violations instead of clamping") {
  std::vector<LatencySample> v;
  for (int s = 100; s <= 1000; s += 100) v.push_back({double(s), 0, 1.0 - 1e-4 * s, {}});
  const auto f = fit_prefill_latency(v);
  CHECK_FALSE(f.valid);
  CHECK(f.coeffs.alpha < 0.0);
}

TEST_CASE("synth_generate determinism and noise level") {
  const auto plan = standard_plan();
  const auto a = synth_generate(reference_set(), plan, 0.01, 42);
  const auto b = synth_generate(reference_set(), plan, 0.01, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].energy_wh == b[i].energy_wh);
  }
  const auto exact = synth_generate(reference_set(), plan, 0.0, 0);
  CHECK(exact[0].t == eval_prefill_latency(kPL, plan[0].s));

  std::vector<GridPoint> big(10000, GridPoint{1000, 0});
  const auto noisy = synth_generate(CoefficientSet{kPL, {}, {}, {}}, big, 0.01, 9);
  const double truth = eval_prefill_latency(kPL, 1000.0);
  double sum = 0.0, sq = 0.0;
  for (const auto& x : noisy) {
    const double r = x.t / truth - 1.0;
    sum += r;
    sq += r * r;
  }
  const double mean = sum / noisy.size();
  const double sd = std::sqrt(sq / noisy.size() - mean * mean);
  CHECK(std::abs(sd - 0.01) <= 0.001);
  CHECK(!noisy[0].energy_wh.has_value());

  CHECK(code_of([] { synth_generate(reference_set(), std::vector<GridPoint>{{1, 1}}, 0.0, 0); }) ==
        Errc::ModelOutOfRange);
  CHECK_THROWS_AS(synth_generate(reference_set(), std::vector<GridPoint>{{100, 0}}, -0.1, 0), Error);
}

TEST_CASE("property: fits recover random coefficient draws") {
  testing::Gen gen(33);
  for (int trial = 0; trial < 100; ++trial) {
    const PrefillLatencyCoeffs<> pl{gen.log_uniform(1e-5, 1e-2), gen.log_uniform(1e-10, 1e-6), gen.uniform(0.001, 1)};
    const DecodeLatencyCoeffs<> dl{gen.log_uniform(1e-3, 1e-1), gen.log_uniform(1e-9, 1e-5),
                                   gen.log_uniform(1e-9, 1e-5), gen.uniform(0.0, 0.1)};
    const PrefillEnergyCoeffs<> pe{gen.log_uniform(1e-6, 1e-3), gen.uniform(-1e-2, 1e-2)};
    const DecodeEnergyCoeffs<> de{gen.log_uniform(1e-4, 1e-2), gen.log_uniform(1e-9, 1e-5), gen.uniform(-1e-2, 1e-2)};
    const auto samples = synth_generate({pl, dl, pe, de}, standard_plan(), 0.0, 0);
    const auto fpl = fit_prefill_latency(samples).coeffs;
    const auto fdl = fit_decode_latency(samples).coeffs;
    const auto fpe = fit_prefill_energy(samples).coeffs;
    const auto fde = fit_decode_energy(samples).coeffs;
    REQUIRE(rel_err(fpl.alpha, pl.alpha) < 1e-6);
    REQUIRE(rel_err(fpl.beta, pl.beta) < 1e-6);
    REQUIRE(rel_err(fpl.gamma, pl.gamma) < 1e-6);
    REQUIRE(rel_err(fdl.eta, dl.eta) < 1e-6);
    REQUIRE(rel_err(fdl.theta, dl.theta) < 1e-6);
    REQUIRE(rel_err(fdl.phi, dl.phi) < 1e-6);
    REQUIRE(std::abs(fdl.rho - dl.rho) < 1e-6 * std::max(1e-3, std::abs(dl.rho)));
    REQUIRE(rel_err(fpe.a, pe.a) < 1e-6);
    REQUIRE(std::abs(fpe.b - pe.b) < 1e-6 * std::max(1e-3, std::abs(pe.b)));
    REQUIRE(rel_err(fde.c, de.c) < 1e-6);
    REQUIRE(rel_err(fde.d, de.d) < 1e-6);
    REQUIRE(std::abs(fde.g_intercept - de.g_intercept) < 1e-6 * std::max(1e-3, std::abs(de.g_intercept)));
  }
}

TEST_CASE("property: evaluators are monotone for nonnegative coefficients") {
  testing::Gen gen(34);
  for (int i = 0; i < 1000; ++i) {
    const PrefillLatencyCoeffs<> pl{gen.uniform(0, 1e-3), gen.uniform(0, 1e-7), gen.uniform(-1, 1)};
    const DecodeLatencyCoeffs<> dl{gen.uniform(0, 1e-1), gen.uniform(0, 1e-6), gen.uniform(0, 1e-6), gen.uniform(-1, 1)};
    const double s = gen.uniform(1, 30000), g = gen.uniform(1, 1000), ds = gen.uniform(0, 100), dg = gen.uniform(0, 10);
    REQUIRE(eval_prefill_latency(pl, s + ds) >= eval_prefill_latency(pl, s));
    REQUIRE(eval_decode_latency(dl, s + ds, g) >= eval_decode_latency(dl, s, g));
    REQUIRE(eval_decode_latency(dl, s, g + dg) >= eval_decode_latency(dl, s, g));
  }
}

TEST_CASE("coefficient files") {
  std::ostringstream out;
  reference_set().write(out);
  const auto back = CoefficientSet::from_config(KeyValueFile::parse_text(out.str()));
  CHECK(back.decode_latency->rho == kDL.rho);
  CHECK(back.decode_energy->g_intercept == kDE.g_intercept);
  CHECK(out.str().find("e-04") != std::string::npos);

  const auto partial = CoefficientSet::from_config(KeyValueFile::parse_text("a = 1e-5\nb = 2e-3\n"));
  CHECK(partial.prefill_energy);
  CHECK_FALSE(partial.prefill_latency);
  CHECK(code_of([] { CoefficientSet::from_config(KeyValueFile::parse_text("alpha = 1\n")); }) == Errc::Parse);
  CHECK_THROWS_AS(CoefficientSet::from_config(KeyValueFile::parse_text("zeta = 1\n")), Error);
}
