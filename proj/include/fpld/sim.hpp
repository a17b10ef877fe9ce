#pragma once

// Synthetic probe-logit simulator: a fixed truth P*, noisy node
// observations, the quantized uplink, and the experiment sweeps.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpld/softmax.hpp"

namespace fpld {

enum class SimMode {
  kVanilla,          // every round re-sends the full logits; last round is used
  kRefine,           // residuals against the broadcast aggregate, shrinking range
  kRefineFixedStep,  // residuals with the round-1 quantizer every round
};

struct SimConfig {
  std::string experiment_id = "fpld";
  int V = 256;
  int K = 4;
  double n = 30000;  // +inf: exact logits
  int m = 64;
  int T = 1;
  int T0 = 1;
  std::vector<std::uint64_t> seeds;
  double L = 1.0;
  std::vector<double> L_list;  // per-node clips (heterogeneous runs)
  int bits = 4;
  std::vector<int> bits_list;  // per-node bits per coordinate
  SimMode mode = SimMode::kVanilla;
  double truth_scale = 0.2;
  double truth_margin = 0.5;  // truth clamped to +-truth_margin * L
  double gamma = 0.0;         // refinement slack; <= 0 selects 1 + 2^-bits
  std::uint64_t truth_seed = 1;
  int jobs = 0;  // 0: OpenMP default

  double node_clip(int i) const { return L_list.empty() ? L : L_list.at(i); }
  int node_bits(int i) const { return bits_list.empty() ? bits : bits_list.at(i); }
  /// Throws InvalidParameter on any range violation.
  void validate() const;
};

inline constexpr double kExactLogits = std::numeric_limits<double>::infinity();

struct Truth {
  std::vector<std::vector<double>> logits;  // m rows of V
  std::vector<ProbVector> probs;
};

/// Fixed probe truth drawn from cfg.truth_seed.
Truth gen_truth(const SimConfig& cfg);

/// ell* + N(0, 1/n) per coordinate, clamped to [-clip, clip].
std::vector<double> node_observe(std::span<const double> truth, double n, double clip,
                                 std::uint64_t stream_seed, int node, int probe);

/// Per-run stream seed for (experiment, seed).
std::uint64_t run_stream_seed(const SimConfig& cfg, std::uint64_t seed);

/// Mean KL(p* || softmax(aggregate)) over probes after cfg.T rounds in
/// vanilla mode. Payloads go through pack/unpack; when `capture` is set every
/// payload is appended to it in capture-file framing.
double run_fpld(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                std::vector<std::uint8_t>* capture = nullptr);

/// Same for the residual modes (kRefine / kRefineFixedStep).
double run_sequential(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                      std::vector<std::uint8_t>* capture = nullptr);

/// Dispatches on cfg.mode.
double run_once(const SimConfig& cfg, const Truth& truth, std::uint64_t seed);

/// Runs every seed in cfg.seeds; the parallel version uses up to cfg.jobs
/// threads and returns values bitwise equal to the serial one.
std::vector<double> run_seeds(const SimConfig& cfg, const Truth& truth);
std::vector<double> run_seeds_serial(const SimConfig& cfg, const Truth& truth);

struct ResultRow {
  std::string experiment_id;
  std::string sweep_name;
  double sweep_value = 0;
  std::string policy;
  std::uint64_t seed = 0;
  double kl = 0;
  double upper_bound = 0;
  double lower_bound = 0;
  double suboptimality_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct PointSummary {
  std::string sweep_name;
  double sweep_value = 0;
  std::string policy;
  std::size_t count = 0;
  double mean = 0;
  double stderr_ = 0;
  double upper_bound = 0;
  double lower_bound = 0;
  double suboptimality_mean = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<PointSummary> points;  // in first-appearance order
  double cp = 0;                     // empirical non-degeneracy constant of the truth
};

/// Groups rows by (sweep_name, sweep_value, policy).
std::vector<PointSummary> summarize(const std::vector<ResultRow>& rows);

struct Fig1Sweep {
  std::vector<int> K_values{2, 4, 8, 16};
  int K_sweep_bits = 4;
  std::vector<int> bits_values{2, 3, 4, 5, 6, 7, 8};
  int bits_sweep_K = 4;
};

ExperimentResult sweep_fig1(const SimConfig& cfg, const Fig1Sweep& sweep = {});

struct Fig2Sweep {
  std::vector<double> budgets_over_V{8, 12, 16, 20, 24};
};

/// cfg.L_list gives the per-node clips; weights are L_i^2.
ExperimentResult sweep_fig2(const SimConfig& cfg, const Fig2Sweep& sweep = {});

struct AdaptiveOptions {
  double budget_over_V = 8;
  bool oracle = false;  // use the true weights instead of the warm-up estimate
  double delta = 0.05;
};

struct AdaptiveRun {
  double kl = 0;
  double suboptimality_ratio = 1;
  std::vector<double> w_hat;
  std::vector<int> bits;
  double eta_bound = 0;
};

/// Warm-up at the uniform pilot for cfg.T0 rounds, then the plug-in plan for
/// rounds T0+1..T. Node i sends (L_i / L) times its clamped observation so
/// its second moment scales with L_i^2.
AdaptiveRun run_adaptive_seed(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                              const AdaptiveOptions& opt);

ExperimentResult run_adaptive(const SimConfig& cfg, const AdaptiveOptions& opt);

}  // namespace fpld
