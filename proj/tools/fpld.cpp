// fpld: bound calculator, allocator and experiment runner.
//
// Exit codes: 0 ok, 1 failed property or runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fpld/alloc.hpp"
#include "fpld/bounds.hpp"
#include "fpld/config.hpp"
#include "fpld/error.hpp"
#include "fpld/report.hpp"
#include "fpld/sim.hpp"
#include "fpld/validate.hpp"
#include "fpld/wire.hpp"

namespace fs = std::filesystem;
using namespace fpld;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

std::string default_seed() {
  const char* env = std::getenv("FPLD_SEED");
  return env != nullptr && *env != '\0' ? env : "1";
}

// Flags shared by the experiment subcommands. Every flag is stored as a
// config key and overrides the file.
struct ExperimentFlags {
  std::string config_path;
  std::string out_dir;
  bool plot = false;
  std::string capture;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& name) {
    out_dir = "out/" + name;
    app->add_option("--config", config_path, "key = value experiment file");
    app->add_option("--out", out_dir, "output directory")->capture_default_str();
    app->add_flag("--plot", plot, "also write SVG plots");
    const std::vector<std::pair<std::string, std::string>> keys{
        {"--seed", "seed"},           {"--seeds", "seed_count"},
        {"--seed-list", "seed_list"}, {"--jobs", "jobs"},
        {"--V", "V"},                 {"--K", "K"},
        {"--n", "n"},                 {"--m", "m"},
        {"--T", "T"},                 {"--T0", "T0"},
        {"--L", "L"},                 {"--L-list", "L_list"},
        {"--bits", "bits"},           {"--mode", "mode"},
        {"--gamma", "gamma"},         {"--truth-scale", "truth_scale"},
        {"--truth-margin", "truth_margin"}, {"--truth-seed", "truth_seed"},
        {"--experiment-id", "experiment_id"},
    };
    for (const auto& [flag, key] : keys) {
      app->add_option(flag, values[key], "overrides config key '" + key + "'");
    }
  }

  void add_key(CLI::App* app, const std::string& flag, const std::string& key,
               const std::string& help) {
    app->add_option(flag, values[key], help);
  }

  Config resolve(const std::map<std::string, std::string>& defaults) const {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    for (const auto& [k, v] : defaults) {
      if (k == "seed_count" && cfg.contains("seed_list")) continue;
      if (!cfg.contains(k)) cfg.set(k, v);
    }
    for (const auto& [k, v] : values) {
      if (!v.empty()) cfg.set(k, v);
    }
    if (!cfg.contains("seed")) cfg.set("seed", default_seed());
    // A seed count on the command line wins over a list from the file.
    if (values.count("seed_count") && !values.at("seed_count").empty()) {
      Config copy;
      for (const auto& [k, v] : cfg.values()) {
        if (k != "seed_list") copy.set(k, v);
      }
      return copy;
    }
    return cfg;
  }
};

void reject_unused(const Config& cfg) {
  const auto extra = cfg.unused();
  if (extra.empty()) return;
  std::string msg = "unknown config key(s):";
  for (const auto& k : extra) msg += " " + k;
  throw UsageError(msg);
}

SimConfig sim_from(Config& cfg) {
  SimConfig sim;
  apply_sim_config(cfg, sim);
  if (sim.seeds.empty()) sim.seeds.push_back(static_cast<std::uint64_t>(parse_int(*cfg.get("seed"))));
  cfg.get("seed");
  sim.validate();
  return sim;
}

void print_points(const std::vector<PointSummary>& points) {
  std::printf("%-12s %10s %-10s %6s %14s %12s %14s %14s\n", "sweep", "value", "policy", "seeds",
              "mean_kl", "stderr", "upper", "lower");
  for (const auto& p : points) {
    std::printf("%-12s %10g %-10s %6zu %14.6e %12.3e %14.6e %14.6e\n", p.sweep_name.c_str(),
                p.sweep_value, p.policy.c_str(), p.count, p.mean, p.stderr_, p.upper_bound,
                p.lower_bound);
  }
}

void write_outputs(const ExperimentFlags& flags, const std::string& name,
                   const std::string& subcommand, const ExperimentResult& result,
                   const std::string& resolved, bool with_subopt,
                   const std::vector<std::string>& plot_sweeps) {
  const fs::path dir = flags.out_dir;
  write_text(dir / (name + ".csv"), csv_text(result.rows, with_subopt));
  write_text(dir / (name + ".manifest"),
             manifest_text(subcommand, flags.config_path, flags.out_dir, resolved));
  if (flags.plot) {
    for (const auto& sweep : plot_sweeps) {
      write_text(dir / (name + "_" + sweep + ".svg"), svg_plot(result.points, sweep, name + ": " + sweep));
    }
  }
  std::printf("wrote %s\n", (dir / (name + ".csv")).string().c_str());
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

int cmd_fig1(const ExperimentFlags& flags) {
  Config cfg = flags.resolve({{"experiment_id", "fig1"}, {"seed_count", "30"}});
  Fig1Sweep sweep;
  if (auto v = cfg.get("K_values")) sweep.K_values = parse_int_list(*v);
  if (auto v = cfg.get("bits_values")) sweep.bits_values = parse_int_list(*v);
  if (auto v = cfg.get("K_sweep_bits")) sweep.K_sweep_bits = static_cast<int>(parse_int(*v));
  if (auto v = cfg.get("bits_sweep_K")) sweep.bits_sweep_K = static_cast<int>(parse_int(*v));
  const SimConfig sim = sim_from(cfg);
  reject_unused(cfg);

  const ExperimentResult result = sweep_fig1(sim, sweep);
  std::printf("empirical c_p = %.6f\n", result.cp);
  print_points(result.points);
  const std::string resolved = sim_config_text(sim) + "K_values = " + join_ints(sweep.K_values) +
                               "\nbits_values = " + join_ints(sweep.bits_values) +
                               "\nK_sweep_bits = " + std::to_string(sweep.K_sweep_bits) +
                               "\nbits_sweep_K = " + std::to_string(sweep.bits_sweep_K) + "\n";
  write_outputs(flags, "fig1", "fig1", result, resolved, false, {"K", "bits"});
  if (!flags.capture.empty()) {
    // Payloads of the first seed at the first K-sweep point.
    SimConfig first = sim;
    first.K = sweep.K_values.front();
    first.bits = sweep.K_sweep_bits;
    std::vector<std::uint8_t> bytes;
    run_fpld(first, gen_truth(first), sim.seeds.front(), &bytes);
    write_text(flags.capture, std::string(bytes.begin(), bytes.end()));
    std::printf("wrote %s\n", flags.capture.c_str());
  }
  return 0;
}

int cmd_fig2(const ExperimentFlags& flags) {
  Config cfg = flags.resolve({{"experiment_id", "fig2"},
                              {"seed_count", "100"},
                              {"K", "4"},
                              {"L_list", "1,1,4,4"}});
  Fig2Sweep sweep;
  if (auto v = cfg.get("budgets_over_V")) sweep.budgets_over_V = parse_double_list(*v);
  const SimConfig sim = sim_from(cfg);
  reject_unused(cfg);

  const ExperimentResult result = sweep_fig2(sim, sweep);
  print_points(result.points);
  const std::string resolved =
      sim_config_text(sim) + "budgets_over_V = " + join_doubles(sweep.budgets_over_V) + "\n";
  write_outputs(flags, "fig2", "fig2", result, resolved, false, {"Btot_over_V"});
  return 0;
}

int cmd_adaptive(const ExperimentFlags& flags) {
  Config cfg = flags.resolve({{"experiment_id", "adaptive"},
                              {"seed_count", "100"},
                              {"K", "4"},
                              {"L_list", "1,1,4,4"}});
  AdaptiveOptions opt;
  if (auto v = cfg.get("budget_over_V")) opt.budget_over_V = parse_double(*v);
  if (auto v = cfg.get("oracle")) opt.oracle = (*v == "true" || *v == "1");
  if (auto v = cfg.get("delta")) opt.delta = parse_double(*v);
  SimConfig sim = sim_from(cfg);
  if (!cfg.contains("T")) sim.T = sim.T0 + 1;
  reject_unused(cfg);
  if (sim.T < sim.T0 + 1) throw UsageError("adaptive needs T >= T0 + 1");

  const ExperimentResult result = run_adaptive(sim, opt);
  print_points(result.points);
  std::printf("mean suboptimality ratio = %.6f\n", result.points.front().suboptimality_mean);
  const std::string resolved = sim_config_text(sim) + "budget_over_V = " +
                               format_double(opt.budget_over_V) + "\noracle = " +
                               (opt.oracle ? "true" : "false") + "\ndelta = " +
                               format_double(opt.delta) + "\n";
  write_outputs(flags, "adaptive", "adaptive", result, resolved, true, {});
  return 0;
}

struct BoundsFlags {
  std::optional<int> K;
  std::optional<double> V;
  std::optional<int> bits;
  std::string B_list, L_list, csv;
  BoundParams p;
};

int cmd_bounds(BoundsFlags& f) {
  BoundParams p = f.p;
  p.K = *f.K;
  p.V = *f.V;
  if (!f.L_list.empty()) p.L_list = parse_double_list(f.L_list);
  if (!f.B_list.empty()) {
    p.B_list = parse_double_list(f.B_list);
    if (static_cast<int>(p.B_list.size()) != p.K) throw UsageError("--B-list needs K entries");
  } else if (f.bits) {
    p.B = static_cast<double>(*f.bits) * p.V;
  } else {
    throw UsageError("one of --bits-per-coord or --B-list is required");
  }
  p.validate();

  const BoundEstimates est = p.heterogeneous() ? upper_bound_heterogeneous(p)
                                               : upper_bound_homogeneous(p);
  std::printf("%s upper bound\n", p.heterogeneous() ? "heterogeneous" : "homogeneous");
  std::printf("  statistical_term  %.6e\n", est.statistical_term);
  std::printf("  probe_term        %.6e\n", est.probe_term);
  std::printf("  bandwidth_term    %.6e\n", est.bandwidth_term);
  std::printf("  slack_term        %.6e\n", est.slack_term);
  std::printf("  total             %.6e\n", est.total);
  std::printf("  small_error_ok    %s\n", est.se_ok ? "yes" : "no");
  std::printf("  small_error'_ok   %s\n", est.se_prime_ok ? "yes" : "no");
  std::string csv = "term,value\n";
  auto row = [&](const char* name, double v) { csv += std::string(name) + "," + format_double(v) + "\n"; };
  row("statistical_term", est.statistical_term);
  row("probe_term", est.probe_term);
  row("bandwidth_term", est.bandwidth_term);
  row("slack_term", est.slack_term);
  row("total", est.total);
  if (!p.heterogeneous()) {
    const LowerBound lo = lower_bound_fpld(p);
    std::printf("lower bound         %.6e%s\n", lo.value, lo.out_of_regime ? "  (B < V: outside stated range)" : "");
    row("lower_bound", lo.value);
    if (p.T > 1) {
      const MultiRoundBound mr = multiround_bound(p);
      std::printf("multi-round term    %.6e  (remainder %.3e)\n", mr.value, mr.remainder);
      row("multiround_term", mr.value);
    }
  }
  if (!f.csv.empty()) write_text(f.csv, csv);
  return 0;
}

struct AllocateFlags {
  std::string w;
  double B_tot = 0;
  double V = 256;
  std::optional<double> B_max;
};

int cmd_allocate(const AllocateFlags& f) {
  const std::vector<double> w = parse_double_list(f.w);
  AllocationPlan plan;
  try {
    plan = waterfill_clipped(w, f.B_tot, f.V, f.B_max);
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitFailure;
  }
  const std::vector<int> bits = integerize(plan, f.V);
  std::vector<double> int_bits;
  for (int b : bits) int_bits.push_back(b * f.V);
  std::printf("real-valued plan (bits per probe context):");
  for (double b : plan.bits) std::printf(" %g", b);
  std::printf("\n  F = %.6e\n", objective_F(plan.bits, w, f.V));
  std::printf("integerized plan (bits per coordinate):");
  for (int b : bits) std::printf(" %d", b);
  std::printf("\n  as bits per probe context:");
  for (double b : int_bits) std::printf(" %g", b);
  std::printf("\n  F = %.6e\n", objective_F(int_bits, w, f.V));
  return 0;
}

int cmd_validate(double bias) {
  ValidationOptions opt;
  opt.quantizer_bias = bias;
  bool all = true;
  for (const auto& r : run_validation(opt)) {
    std::printf("%-4s %-20s %-26s = %-12.4g (threshold %g)\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.statistic_name.c_str(), r.statistic, r.threshold);
    all = all && r.pass;
  }
  return all ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandwidth-limited federated probe-logit distillation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  BoundsFlags bf;
  auto* bounds = app.add_subcommand("bounds", "evaluate the upper/lower bound expressions");
  bounds->add_option("--K", bf.K, "nodes")->required();
  bounds->add_option("--V", bf.V, "vocabulary size")->required();
  bounds->add_option("--bits-per-coord", bf.bits, "homogeneous bits per coordinate");
  bounds->add_option("--B-list", bf.B_list, "per-node bits per probe context (comma list)");
  bounds->add_option("--L", bf.p.L, "clip level");
  bounds->add_option("--L-list", bf.L_list, "per-node clip levels");
  bounds->add_option("--n", bf.p.n, "samples per node (inf for exact)");
  bounds->add_option("--m", bf.p.m, "probe contexts");
  bounds->add_option("--d", bf.p.d, "parameter dimension");
  bounds->add_option("--delta", bf.p.delta, "failure probability");
  bounds->add_option("--rho", bf.p.rho, "probe coverage ratio");
  bounds->add_option("--T", bf.p.T, "rounds");
  bounds->add_option("--cp", bf.p.cp, "non-degeneracy constant");
  bounds->add_option("--c1", bf.p.c1);
  bounds->add_option("--c2", bf.p.c2);
  bounds->add_option("--c0", bf.p.c0, "small-error threshold");
  bounds->add_option("--eps-opt", bf.p.eps_opt);
  bounds->add_option("--eps-fit", bf.p.eps_fit);
  bounds->add_option("--csv", bf.csv, "also write the terms to this CSV");

  AllocateFlags af;
  auto* allocate = app.add_subcommand("allocate", "water-filling bandwidth allocation");
  allocate->add_option("--w", af.w, "node weights (comma list)")->required();
  allocate->add_option("--Btot", af.B_tot, "total bits per probe context")->required();
  allocate->add_option("--V", af.V, "vocabulary size")->capture_default_str();
  allocate->add_option("--Bmax", af.B_max, "per-node cap");

  ExperimentFlags f1, f2, fa;
  auto* fig1 = app.add_subcommand("fig1", "K-sweep and bits-sweep with bound curves");
  f1.add(fig1, "fig1");
  f1.add_key(fig1, "--K-values", "K_values", "K sweep (comma list)");
  f1.add_key(fig1, "--bits-values", "bits_values", "bits sweep (comma list)");
  fig1->add_option("--capture", f1.capture, "write first-run payloads to this capture file");
  auto* fig2 = app.add_subcommand("fig2", "optimal / uniform / inverse-weighted allocation");
  f2.add(fig2, "fig2");
  f2.add_key(fig2, "--budgets", "budgets_over_V", "B_tot / V sweep (comma list)");
  auto* adaptive = app.add_subcommand("adaptive", "warm-up estimation then plug-in allocation");
  fa.add(adaptive, "adaptive");
  fa.add_key(adaptive, "--budget", "budget_over_V", "B_tot / V");
  fa.add_key(adaptive, "--oracle", "oracle", "use true weights (true/false)");
  fa.add_key(adaptive, "--delta", "delta", "confidence level for the reported radius");

  double bias = 0.0;
  auto* validate = app.add_subcommand("validate", "fast invariant suite");
  validate->add_option("--inject-bias", bias, "test hook: bias added to reconstructions")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*bounds) return cmd_bounds(bf);
    if (*allocate) return cmd_allocate(af);
    if (*fig1) return cmd_fig1(f1);
    if (*fig2) return cmd_fig2(f2);
    if (*adaptive) return cmd_adaptive(fa);
    if (*validate) return cmd_validate(bias);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
