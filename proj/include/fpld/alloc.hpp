#pragma once

// Bandwidth allocation across nodes for the weighted distortion objective
//   F(B) = (1/K^2) sum_i w_i 2^{-2 B_i / V}.

#include <optional>
#include <span>
#include <vector>

namespace fpld {

struct AllocationPlan {
  std::vector<double> bits;     // B_i, bits per probe context
  std::vector<double> weights;  // w_i used to build the plan
  double total_budget = 0;      // B_tot
  std::optional<double> cap;    // B_max
  std::vector<bool> saturated;  // pinned at 0 or at the cap
};

double objective_F(std::span<const double> bits, std::span<const double> weights, double V);

/// Closed-form water-filling B_tot/K + (V/2) log2(w_i / geometric_mean(w)).
/// Entries may be negative.
AllocationPlan waterfill(std::span<const double> weights, double total_budget, double V);

/// Box-constrained water-filling on [0, cap] by an active-set method that
/// pins one side of the violators per pass. Throws Infeasible when
/// K * cap < total_budget.
AllocationPlan waterfill_clipped(std::span<const double> weights, double total_budget,
                                 double V, std::optional<double> cap = std::nullopt);

/// Independent reference: bisection on the Lagrange multiplier of the
/// budget constraint with box projection.
AllocationPlan kkt_oracle(std::span<const double> weights, double total_budget, double V,
                          std::optional<double> cap = std::nullopt);

/// Straw-man policy: the water-filling tilt with its sign flipped, so
/// lower-weight nodes get more bits. Clipped at zero with redistribution.
AllocationPlan inverse_weighted_baseline(std::span<const double> weights,
                                         double total_budget, double V);

AllocationPlan uniform_allocation(std::span<const double> weights, double total_budget);

/// Integer bits per coordinate for the channel: round B_i / V, then move
/// single bits greedily by smallest objective change until the integer
/// plan fits the budget (and uses any whole-bit slack).
std::vector<int> integerize(const AllocationPlan& plan, double V);

}  // namespace fpld
