#pragma once

// Two-stage adaptive allocation: estimate per-node second moments from a
// uniform-pilot warm-up, then water-fill on the estimates.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fpld/alloc.hpp"

namespace fpld {

/// Reconstructed logits received during warm-up, laid out
/// [node][round][probe][coordinate].
struct WarmupRecord {
  std::size_t K = 0;
  std::size_t T0 = 0;
  std::size_t m = 0;
  std::size_t V = 0;
  std::vector<double> clips;  // per-node clip levels
  int pilot_bits = 0;         // bits per coordinate of the uniform pilot
  std::vector<double> values;

  double& at(std::size_t node, std::size_t round, std::size_t probe, std::size_t v) {
    return values[((node * T0 + round) * m + probe) * V + v];
  }
  double at(std::size_t node, std::size_t round, std::size_t probe, std::size_t v) const {
    return values[((node * T0 + round) * m + probe) * V + v];
  }
};

struct WeightEstimate {
  std::vector<double> w_hat;
  double eta_bound = 0;  // Hoeffding radius at level delta (reported, not enforced)
  double R_ell = 0;      // largest post-quantization range over nodes
  double delta = 0.05;
};

/// Post-quantization range clip * (1 + 2^-bits).
double post_quantization_range(double clip, int bits_per_coord);

/// Throws InvalidParameter on missing records and ProtocolError when a
/// per-(node, round, probe) block mean of squares leaves [0, R_ell^2].
WeightEstimate estimate_weights(const WarmupRecord& rec, double delta = 0.05);

/// Plug-in clipped water-filling. Estimates below floor_ratio * max are
/// raised to that floor (with a warning on stderr).
AllocationPlan adaptive_allocate(const WeightEstimate& est, double total_budget, double V,
                                 std::optional<double> cap = std::nullopt,
                                 double floor_ratio = 1e-9);

/// F(plan built from w_hat, evaluated under w_true) / F(optimal plan for w_true).
double suboptimality_ratio(std::span<const double> w_true, std::span<const double> w_hat,
                           double total_budget, double V);

/// (1/K) sum_i (w_i / w_hat_i) * (geo(w_hat) / geo(w)); equals
/// suboptimality_ratio whenever neither plan clips at zero.
double suboptimality_identity(std::span<const double> w_true, std::span<const double> w_hat);

}  // namespace fpld
