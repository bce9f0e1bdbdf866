#include "infercost/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "infercost/bundled.hpp"
#include "infercost/error.hpp"
#include "infercost/estimator.hpp"
#include "infercost/kv_config.hpp"
#include "infercost/report.hpp"
#include "infercost/trace.hpp"

namespace infercost {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "a:b:step" (inclusive), "x,y,z" or a single number.
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("range must be start:stop:step, got '" + text + "'");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("bad range '" + text + "'");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

TraceFormat trace_format_for(const std::string& path, const std::string& explicit_format) {
  if (!explicit_format.empty()) return parse_trace_format(explicit_format);
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".jsonl" || ext == ".ndjson" || ext == ".json" ? TraceFormat::LineJson : TraceFormat::Delimited;
}

struct TraceArgs {
  std::string path;
  std::string format;
  std::string schema;
  std::size_t drop_first = 0;

  void add_to(CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--trace", path, "Trace file (delimited or line-json)");
    if (required) opt->required();
    cmd->add_option("--trace-format", format, "delimited | line-json (default: by extension)");
    cmd->add_option("--schema", schema, "Column-name mapping file (external = field)");
    cmd->add_option("--drop-first", drop_first, "Drop the first k runs of every (prompt, kind) group");
  }

  std::vector<RunRecord> load(std::ostream& err) const {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open trace " + path);
    IngestOptions opts;
    opts.drop_first = drop_first;
    if (!schema.empty()) opts.schema = load_schema_map(schema);
    auto parsed = parse_records(in, trace_format_for(path, format), opts);
    for (const auto& e : parsed.errors) err << "warning: " << path << ":" << e.line << ": " << e.message << '\n';
    return std::move(parsed.records);
  }
};

struct WorkloadArgs {
  std::string file;
  std::string trace;
  double s_mean = 0.0, s_std = 0.0, g_mean = 0.0, g_std = 0.0;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  CLI::Option* s_mean_opt = nullptr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--workload", file, "Workload file: delimited with columns s,g[,weight]");
    cmd->add_option("--workload-trace", trace, "Use the full runs of a trace as the workload");
    s_mean_opt = cmd->add_option("--s-mean", s_mean, "Parametric workload: mean input tokens");
    cmd->add_option("--s-std", s_std, "Parametric workload: input token std");
    cmd->add_option("--g-mean", g_mean, "Parametric workload: mean output tokens");
    cmd->add_option("--g-std", g_std, "Parametric workload: output token std");
    cmd->add_option("--count", count, "Parametric workload: number of draws");
    cmd->add_option("--seed", seed, "Parametric workload: RNG seed");
  }

  bool given() const { return !file.empty() || !trace.empty() || s_mean_opt->count() > 0; }

  WorkloadSpec build(std::ostream& err) const {
    if (!file.empty()) return WorkloadSpec(read_file());
    if (!trace.empty()) {
      TraceArgs t;
      t.path = trace;
      std::vector<WorkloadEntry> entries;
      for (const auto& r : t.load(err)) {
        if (r.run_kind == RunKind::Full) {
          entries.push_back({static_cast<double>(r.input_tokens), static_cast<double>(r.output_tokens), 1.0});
        }
      }
      if (entries.empty()) throw Error(Errc::EmptySelection, "trace has no full runs");
      return WorkloadSpec(std::move(entries));
    }
    return WorkloadSpec(ParametricWorkload{s_mean, s_std, g_mean, g_std, count, seed});
  }

  std::vector<WorkloadEntry> read_file() const {
    std::ifstream in(file);
    if (!in) throw Error(Errc::Io, "cannot open workload " + file);
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::EmptyInput, "workload file is empty");
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) header.push_back(h);
    auto col = [&](const std::string& name) -> int {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
      }
      return -1;
    };
    const int s_col = col("s"), g_col = col("g"), w_col = col("weight");
    if (s_col < 0 || g_col < 0) throw Error(Errc::Parse, file + ": header needs columns s and g");
    std::vector<WorkloadEntry> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      if (cells.size() != header.size()) {
        throw Error(Errc::Parse, file + ":" + std::to_string(line_no) + ": wrong field count");
      }
      try {
        out.push_back({std::stod(cells[s_col]), std::stod(cells[g_col]), w_col >= 0 ? std::stod(cells[w_col]) : 1.0});
      } catch (const std::logic_error&) {
        throw Error(Errc::Parse, file + ":" + std::to_string(line_no) + ": not a number");
      }
    }
    return out;
  }
};

HardwareProfile load_hw(const std::string& path) {
  return path.empty() ? bundled::h100_profile() : HardwareProfile::load(path);
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

Table breakdown_table(const std::string& name, const EnergyBreakdown& b, double s, double g, double led_watts) {
  return {name,
          {"s", "g", "prefill_wh", "decode_wh", "total_wh", "led_minutes", "provenance"},
          {{s, g, b.prefill_wh, b.decode_wh, b.total_wh, led_equivalent_minutes(std::max(0.0, b.total_wh), led_watts),
            b.provenance}}};
}

std::string fmt_params(double n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3gB", n / 1e9);
  return buf;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latency and energy cost model for transformer inference", "infercost"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format_name = "table";
  app.add_option("--format", format_name, "Output format")
      ->check(CLI::IsMember({"table", "json", "delimited"}));

  // predict
  auto* predict = app.add_subcommand("predict", "Energy of one interaction or a workload");
  double s = 0.0, g = 0.0, led_watts = 5.0;
  std::string coeffs_path, hw_path, model_path;
  WorkloadArgs predict_workload;
  auto* s_opt = predict->add_option("-s,--input-tokens", s, "Input tokens");
  auto* g_opt = predict->add_option("-g,--output-tokens", g, "Output tokens");
  predict->add_option("--coeffs", coeffs_path, "Coefficient file (default: bundled reference fit)");
  predict->add_option("--model", model_path, "Model spec file: switch to the analytic roofline source");
  predict->add_option("--hw", hw_path, "Hardware profile (default: bundled H100 SXM example)");
  predict->add_option("--led-watts", led_watts, "LED power for the equivalence column");
  predict_workload.add_to(predict);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the phase polynomials to a trace");
  TraceArgs fit_trace;
  fit_trace.add_to(fit, true);
  std::string fit_component = "gpu", fit_out;
  fit->add_option("--component", fit_component, "Energy component to fit")->check(CLI::IsMember({"gpu", "cpu", "ram"}));
  fit->add_option("--out", fit_out, "Write the fitted coefficient file here");

  // decompose
  auto* decomp = app.add_subcommand("decompose", "Per-prompt prefill/decode energy split");
  TraceArgs decomp_trace;
  decomp_trace.add_to(decomp, true);

  // stats
  auto* stats = app.add_subcommand("stats", "Energy statistics per component");
  TraceArgs stats_trace;
  stats_trace.add_to(stats, true);
  std::string stats_phase = "full";
  stats->add_option("--phase", stats_phase, "prefill | decode | full")
      ->check(CLI::IsMember({"prefill", "decode", "full"}));
  stats->add_option("--led-watts", led_watts, "LED power for the equivalence column");

  // hist
  auto* hist = app.add_subcommand("hist", "Histogram of per-run energy");
  TraceArgs hist_trace;
  hist_trace.add_to(hist, true);
  std::string hist_phase = "full", hist_component = "gpu", hist_edges;
  std::size_t hist_bins = 20;
  hist->add_option("--phase", hist_phase, "prefill | decode | full")
      ->check(CLI::IsMember({"prefill", "decode", "full"}));
  hist->add_option("--component", hist_component, "gpu | cpu | ram")->check(CLI::IsMember({"gpu", "cpu", "ram"}));
  auto* bins_opt = hist->add_option("--bins", hist_bins, "Number of equal-width bins");
  hist->add_option("--edges", hist_edges, "Explicit bin edges, comma-separated")->excludes(bins_opt);

  // compare
  auto* compare = app.add_subcommand("compare", "Compare model sizes with the analytic source");
  std::vector<std::string> model_paths;
  std::string compare_hw, g_grid_text = "64,128,256";
  double cs = 0.0, cg = 0.0;
  WorkloadArgs compare_workload;
  compare->add_option("--model", model_paths, "Model spec file (repeatable)")->required();
  compare->add_option("--hw", compare_hw, "Hardware profile (default: bundled H100 SXM example)");
  auto* cs_opt = compare->add_option("-s,--input-tokens", cs, "Input tokens");
  auto* cg_opt = compare->add_option("-g,--output-tokens", cg, "Output tokens");
  compare->add_option("--g-grid", g_grid_text, "Output lengths for the size x length grid");
  compare_workload.add_to(compare);

  // extrapolate
  auto* extrap = app.add_subcommand("extrapolate", "Scale a per-interaction energy to a fleet");
  double per_wh = 0.0, per_day = 0.0;
  extrap->add_option("--wh", per_wh, "Energy per interaction [Wh]")->required();
  extrap->add_option("--per-day", per_day, "Interactions per day")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic trace sampled from coefficient polynomials");
  std::string synth_coeffs, synth_s = "100:4000:300", synth_g = "16:256:16", synth_out, synth_format = "delimited";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  synth->add_option("--coeffs", synth_coeffs, "Coefficient file (default: bundled reference fit)");
  synth->add_option("--s", synth_s, "Input lengths: start:stop:step or a,b,c");
  synth->add_option("--g", synth_g, "Output lengths: start:stop:step or a,b,c");
  synth->add_option("--noise", noise, "Relative Gaussian noise std");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--runs", runs, "Runs per kind per prompt");
  synth->add_option("--out", synth_out, "Output path (default: stdout)");
  synth->add_option("--trace-format", synth_format, "delimited | line-json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty()) err << "error: " << e.what() << '\n';
    err << app.help();
    return kExitUsage;
  }

  const auto format = parse_output_format(format_name);
  auto emit = [&](const std::vector<Table>& tables) { render(out, tables, format); };

  try {
    if (predict->parsed()) {
      EnergySource source = model_path.empty()
                                ? EnergySource(FittedSource{coeffs_path.empty() ? bundled::reference_coefficients()
                                                                                : CoefficientSet::load(coeffs_path),
                                                            load_hw(hw_path)})
                                : EnergySource(AnalyticSource{ModelSpec::load(model_path), load_hw(hw_path)});
      if (predict_workload.given()) {
        const auto est = estimate_workload(source, predict_workload.build(err));
        Table rows{"entries", {"s", "g", "weight", "prefill_wh", "decode_wh", "total_wh"}, {}};
        for (const auto& r : est.rows) {
          rows.rows.push_back({r.entry.s, r.entry.g, r.entry.weight, r.breakdown.prefill_wh, r.breakdown.decode_wh,
                               r.breakdown.total_wh});
        }
        Table mean{"mean",
                   {"entries", "prefill_wh", "decode_wh", "total_wh", "led_minutes", "provenance"},
                   {{static_cast<std::int64_t>(est.rows.size()), est.mean.prefill_wh, est.mean.decode_wh,
                     est.mean.total_wh, led_equivalent_minutes(std::max(0.0, est.mean.total_wh), led_watts),
                     est.mean.provenance}}};
        print_warnings(err, est.mean.warnings);
        emit({mean, rows});
        return kExitOk;
      }
      if (s_opt->count() == 0 || g_opt->count() == 0) {
        throw UsageError("predict needs -s and -g, or a workload (--workload, --workload-trace, --s-mean)");
      }
      const auto b = estimate_interaction(source, s, g);
      print_warnings(err, b.warnings);
      emit({breakdown_table("breakdown", b, s, g, led_watts)});
      return kExitOk;
    }

    if (fit->parsed()) {
      const auto records = fit_trace.load(err);
      const auto component = parse_component(fit_component);
      const auto run_samples = to_fit_samples(records, component);
      const auto decomposition = decompose(records);
      for (const auto& m : decomposition.missing) {
        err << "warning: MissingKind: prompt " << m.prompt_id << " has no " << to_string(m.missing) << " runs\n";
      }
      std::size_t skipped = 0;
      const auto prompt_samples = to_fit_samples(decomposition.prompts, component, &skipped);
      if (skipped) err << "warning: skipped " << skipped << " decomposed samples with non-positive latency\n";

      CoefficientSet result;
      Table coeffs{"coefficients", {"family", "name", "value"}, {}};
      Table fits{"fits", {"family", "samples", "r_squared", "residual_norm", "condition", "valid"}, {}};
      auto record_fit = [&](const char* family, const FitResult<double>& f, bool valid) {
        fits.rows.push_back({std::string(family), static_cast<std::int64_t>(f.coefficients.size() ? 0 : 0),
                             f.r_squared, f.residual_norm, f.condition_estimate,
                             std::string(valid ? "yes" : "no")});
      };
      auto attempt = [&](const char* family, auto&& run) {
        try {
          run();
        } catch (const Error& e) {
          err << "warning: " << family << " fit skipped: " << e.what() << '\n';
        }
      };
      auto count_if = [](const std::vector<LatencySample>& v, bool decode) {
        std::int64_t n = 0;
        for (const auto& x : v) n += decode ? x.g >= 1.0 : x.g == 0.0;
        return n;
      };
      attempt("prefill_latency", [&] {
        const auto f = fit_prefill_latency(run_samples);
        result.prefill_latency = f.coeffs;
        record_fit("prefill_latency", f.fit, f.valid);
        std::get<std::int64_t>(fits.rows.back()[1]) = count_if(run_samples, false);
        coeffs.rows.push_back({std::string("prefill_latency"), std::string("alpha"), f.coeffs.alpha});
        coeffs.rows.push_back({std::string("prefill_latency"), std::string("beta"), f.coeffs.beta});
        coeffs.rows.push_back({std::string("prefill_latency"), std::string("gamma"), f.coeffs.gamma});
      });
      attempt("decode_latency", [&] {
        const auto f = fit_decode_latency(prompt_samples);
        result.decode_latency = f.coeffs;
        record_fit("decode_latency", f.fit, f.valid);
        std::get<std::int64_t>(fits.rows.back()[1]) = count_if(prompt_samples, true);
        coeffs.rows.push_back({std::string("decode_latency"), std::string("eta"), f.coeffs.eta});
        coeffs.rows.push_back({std::string("decode_latency"), std::string("theta"), f.coeffs.theta});
        coeffs.rows.push_back({std::string("decode_latency"), std::string("phi"), f.coeffs.phi});
        coeffs.rows.push_back({std::string("decode_latency"), std::string("rho"), f.coeffs.rho});
      });
      attempt("prefill_energy", [&] {
        const auto f = fit_prefill_energy(run_samples);
        result.prefill_energy = f.coeffs;
        record_fit("prefill_energy", f.fit, f.valid);
        std::get<std::int64_t>(fits.rows.back()[1]) = count_if(run_samples, false);
        coeffs.rows.push_back({std::string("prefill_energy"), std::string("a"), f.coeffs.a});
        coeffs.rows.push_back({std::string("prefill_energy"), std::string("b"), f.coeffs.b});
      });
      attempt("decode_energy", [&] {
        const auto f = fit_decode_energy(prompt_samples);
        result.decode_energy = f.coeffs;
        record_fit("decode_energy", f.fit, f.valid);
        std::get<std::int64_t>(fits.rows.back()[1]) = count_if(prompt_samples, true);
        coeffs.rows.push_back({std::string("decode_energy"), std::string("c"), f.coeffs.c});
        coeffs.rows.push_back({std::string("decode_energy"), std::string("d"), f.coeffs.d});
        coeffs.rows.push_back({std::string("decode_energy"), std::string("g_intercept"), f.coeffs.g_intercept});
      });
      if (fits.rows.empty()) throw Error(Errc::InsufficientSamples, "no coefficient family could be fitted");
      if (!fit_out.empty()) {
        std::ofstream f(fit_out);
        if (!f) throw Error(Errc::Io, "cannot write " + fit_out);
        f << "# fitted from " << fit_trace.path << " (" << fit_component << " energy)\n";
        result.write(f);
      }
      emit({coeffs, fits});
      return kExitOk;
    }

    if (decomp->parsed()) {
      const auto records = decomp_trace.load(err);
      const auto d = decompose(records);
      Table prompts{"prompts",
                    {"prompt_id", "s", "g", "n_prefill", "n_full", "prefill_gpu_wh", "full_gpu_wh", "decode_gpu_wh",
                     "decode_cpu_wh", "decode_ram_wh", "decode_latency_s", "flags"},
                    {}};
      for (const auto& p : d.prompts) {
        prompts.rows.push_back({p.prompt_id, p.input_tokens, p.output_tokens,
                                static_cast<std::int64_t>(p.n_prefill_runs), static_cast<std::int64_t>(p.n_full_runs),
                                p.prefill_mean_wh[0], p.full_mean_wh[0], p.decode_wh[0], p.decode_wh[1], p.decode_wh[2],
                                p.decode_latency_s, std::string(p.negative_decode ? "NegativeDecode" : "")});
      }
      std::vector<Table> tables{prompts};
      if (!d.missing.empty()) {
        Table missing{"missing", {"prompt_id", "missing_kind"}, {}};
        for (const auto& m : d.missing) {
          missing.rows.push_back({m.prompt_id, std::string(to_string(m.missing))});
          err << "warning: MissingKind: prompt " << m.prompt_id << " has no " << to_string(m.missing) << " runs\n";
        }
        tables.push_back(missing);
      }
      emit(tables);
      return kExitOk;
    }

    if (stats->parsed()) {
      const auto records = stats_trace.load(err);
      const auto phase = parse_energy_phase(stats_phase);
      EnergyStats st;
      if (phase == EnergyPhase::Decode) {
        const auto d = decompose(records);
        st = aggregate(std::span<const PromptDecomposition>(d.prompts), phase);
      } else {
        st = aggregate(std::span<const RunRecord>(records), phase);
      }
      Table comps{"components", {"component", "count", "mean_wh", "std_wh", "min_wh", "max_wh"}, {}};
      for (auto c : {Component::Gpu, Component::Cpu, Component::Ram}) {
        const auto& x = st[c];
        comps.rows.push_back(
            {std::string(to_string(c)), static_cast<std::int64_t>(x.count), x.mean, x.std, x.min, x.max});
      }
      Table total{"total",
                  {"phase", "total_mean_wh", "led_minutes"},
                  {{std::string(to_string(phase)), st.total_mean,
                    led_equivalent_minutes(std::max(0.0, st.total_mean), led_watts)}}};
      emit({comps, total});
      return kExitOk;
    }

    if (hist->parsed()) {
      const auto records = hist_trace.load(err);
      const auto phase = parse_energy_phase(hist_phase);
      const auto component = parse_component(hist_component);
      std::vector<double> values;
      if (phase == EnergyPhase::Decode) {
        const auto d = decompose(records);
        values = select_energies(std::span<const PromptDecomposition>(d.prompts), phase, component);
      } else {
        values = select_energies(std::span<const RunRecord>(records), phase, component);
      }
      Histogram h;
      if (!hist_edges.empty()) {
        const auto edges = parse_values(hist_edges);
        h = histogram(values, edges);
      } else {
        h = histogram(values, hist_bins);
      }
      if (format == OutputFormat::Delimited) {
        write_histogram(out, h);
        return kExitOk;
      }
      Table bins{"bins", {"bin_left_edge", "count"}, {}};
      for (std::size_t i = 0; i < h.counts.size(); ++i) {
        bins.rows.push_back({h.edges[i], static_cast<std::int64_t>(h.counts[i])});
      }
      Table summary{"summary",
                    {"values", "mean_wh", "median_wh", "right_skewed", "underflow", "overflow"},
                    {{static_cast<std::int64_t>(values.size()), h.mean, h.median,
                      std::string(h.right_skewed ? "yes" : "no"), static_cast<std::int64_t>(h.underflow),
                      static_cast<std::int64_t>(h.overflow)}}};
      emit({bins, summary});
      return kExitOk;
    }

    if (compare->parsed()) {
      std::vector<ModelSpec> specs;
      for (const auto& p : model_paths) specs.push_back(ModelSpec::load(p));
      const auto hw = load_hw(compare_hw);
      std::optional<WorkloadSpec> workload;
      if (compare_workload.given()) {
        workload = compare_workload.build(err);
      } else if (cs_opt->count() > 0 && cg_opt->count() > 0) {
        workload = WorkloadSpec(std::vector<WorkloadEntry>{{cs, cg, 1.0}});
      } else {
        throw UsageError("compare needs -s and -g, or a workload");
      }
      const auto grid = parse_values(g_grid_text);
      const auto cmp = compare_models(specs, hw, *workload, grid);
      Table rows{"models", {"model", "params", "n_params", "mean_total_wh", "wh_per_token"}, {}};
      for (const auto& r : cmp.rows) {
        rows.rows.push_back({r.name, fmt_params(r.n_params), r.n_params, r.mean_total_wh, r.wh_per_token});
      }
      Table contour{"contour", {"model", "n_params", "g", "decode_wh"}, {}};
      for (const auto& c : cmp.contour) contour.rows.push_back({c.name, c.n_params, c.g, c.decode_wh});
      emit({rows, contour});
      return kExitOk;
    }

    if (extrap->parsed()) {
      const auto f = fleet_extrapolate(per_wh, per_day);
      emit({Table{"fleet",
                  {"wh_per_interaction", "interactions_per_day", "kwh_per_day", "mwh_per_year"},
                  {{per_wh, per_day, f.kwh_per_day, f.mwh_per_year}}}});
      return kExitOk;
    }

    if (synth->parsed()) {
      const auto coeffs = synth_coeffs.empty() ? bundled::reference_coefficients() : CoefficientSet::load(synth_coeffs);
      const auto s_values = parse_values(synth_s);
      const auto g_values = parse_values(synth_g);
      const auto plan = make_grid(s_values, g_values);
      SynthTraceOptions opts;
      opts.noise = noise;
      opts.seed = seed;
      opts.runs_per_kind = runs;
      const auto records = synth_trace(coeffs, plan, opts);
      const auto tf = parse_trace_format(synth_format);
      if (synth_out.empty()) {
        write_records(out, records, tf);
      } else {
        std::ofstream f(synth_out);
        if (!f) throw Error(Errc::Io, "cannot write " + synth_out);
        write_records(f, records, tf);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace infercost
