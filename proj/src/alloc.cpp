#include "fpld/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fpld/error.hpp"

namespace fpld {
namespace {

void check_weights(std::span<const double> w) {
  if (w.empty()) throw InvalidParameter("allocation needs at least one node");
  for (double x : w) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InvalidParameter("allocation weights must be positive and finite");
    }
  }
}

void check_budget(std::span<const double> w, double total, double V,
                  std::optional<double> cap) {
  check_weights(w);
  if (!(total > 0.0)) throw InvalidParameter("total budget must be positive");
  if (!(V > 0.0)) throw InvalidParameter("V must be positive");
  if (cap) {
    if (!(*cap >= 0.0)) throw InvalidParameter("cap must be non-negative");
    if (static_cast<double>(w.size()) * *cap < total) {
      throw Infeasible("budget " + std::to_string(total) + " exceeds K * cap = " +
                       std::to_string(static_cast<double>(w.size()) * *cap));
    }
  }
}

AllocationPlan make_plan(std::span<const double> w, double total,
                         std::optional<double> cap) {
  AllocationPlan plan;
  plan.weights.assign(w.begin(), w.end());
  plan.total_budget = total;
  plan.cap = cap;
  plan.bits.assign(w.size(), 0.0);
  plan.saturated.assign(w.size(), false);
  return plan;
}

}  // namespace

double objective_F(std::span<const double> bits, std::span<const double> weights, double V) {
  if (bits.size() != weights.size()) throw InvalidParameter("objective_F: length mismatch");
  if (bits.empty()) throw InvalidParameter("objective_F: empty allocation");
  double sum = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InvalidParameter("objective_F: weights must be positive");
    sum += weights[i] * std::exp2(-2.0 * bits[i] / V);
  }
  const auto K = static_cast<double>(bits.size());
  return sum / (K * K);
}

AllocationPlan waterfill(std::span<const double> weights, double total_budget, double V) {
  check_budget(weights, total_budget, V, std::nullopt);
  AllocationPlan plan = make_plan(weights, total_budget, std::nullopt);
  const auto K = static_cast<double>(weights.size());
  double mean_log = 0.0;
  for (double w : weights) mean_log += std::log2(w);
  mean_log /= K;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    plan.bits[i] = total_budget / K + 0.5 * V * (std::log2(weights[i]) - mean_log);
  }
  return plan;
}

AllocationPlan waterfill_clipped(std::span<const double> weights, double total_budget,
                                 double V, std::optional<double> cap) {
  check_budget(weights, total_budget, V, cap);
  const std::size_t K = weights.size();
  const double upper = cap.value_or(std::numeric_limits<double>::infinity());
  AllocationPlan plan = make_plan(weights, total_budget, cap);

  std::vector<bool> fixed(K, false);
  std::vector<double> logw(K);
  for (std::size_t i = 0; i < K; ++i) logw[i] = std::log2(weights[i]);

  for (std::size_t pass = 0; pass <= K; ++pass) {
    double remaining = total_budget;
    double free_count = 0.0;
    double free_log = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      if (fixed[i]) {
        remaining -= plan.bits[i];
      } else {
        free_count += 1.0;
        free_log += logw[i];
      }
    }
    if (free_count == 0.0) break;
    const double mean_log = free_log / free_count;

    double below = 0.0;  // total shortfall under 0
    double above = 0.0;  // total excess over the cap
    for (std::size_t i = 0; i < K; ++i) {
      if (fixed[i]) continue;
      plan.bits[i] = remaining / free_count + 0.5 * V * (logw[i] - mean_log);
      if (plan.bits[i] < 0.0) below += -plan.bits[i];
      if (plan.bits[i] > upper) above += plan.bits[i] - upper;
    }
    if (below == 0.0 && above == 0.0) break;

    // Pinning the side with the larger violation keeps earlier pins optimal
    // (Bitran-Hax).
    const bool pin_low = below >= above;
    for (std::size_t i = 0; i < K; ++i) {
      if (fixed[i]) continue;
      if (pin_low && plan.bits[i] < 0.0) {
        plan.bits[i] = 0.0;
        fixed[i] = true;
      } else if (!pin_low && plan.bits[i] > upper) {
        plan.bits[i] = upper;
        fixed[i] = true;
      }
    }
  }
  for (std::size_t i = 0; i < K; ++i) plan.saturated[i] = fixed[i];
  return plan;
}

AllocationPlan kkt_oracle(std::span<const double> weights, double total_budget, double V,
                          std::optional<double> cap) {
  check_budget(weights, total_budget, V, cap);
  const std::size_t K = weights.size();
  const double upper = cap.value_or(std::numeric_limits<double>::infinity());
  AllocationPlan plan = make_plan(weights, total_budget, cap);
  const double Kd = static_cast<double>(K);

  // Stationarity: 2^{-2 B_i / V} = lambda V K^2 / (2 w_i ln 2). Work with
  // mu = log2(lambda); allocations are decreasing in mu.
  auto allocation_at = [&](double mu, std::vector<double>& out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double level =
          mu + std::log2(V * Kd * Kd / (2.0 * weights[i] * std::numbers::ln2));
      out[i] = std::clamp(-0.5 * V * level, 0.0, upper);
      sum += out[i];
    }
    return sum;
  };

  std::vector<double> trial(K);
  double lo = -1.0;  // sum(lo) >= budget
  double hi = 1.0;   // sum(hi) <= budget
  while (allocation_at(lo, trial) < total_budget) lo *= 2.0;
  while (allocation_at(hi, trial) > total_budget) hi *= 2.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (allocation_at(mid, trial) >= total_budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double s_lo = allocation_at(lo, plan.bits);
  // Spread any residual over the interior coordinates so the budget is met.
  double residual = total_budget - s_lo;
  std::size_t interior = 0;
  for (std::size_t i = 0; i < K; ++i) {
    if (plan.bits[i] > 0.0 && plan.bits[i] < upper) ++interior;
  }
  if (interior > 0) {
    for (std::size_t i = 0; i < K; ++i) {
      if (plan.bits[i] > 0.0 && plan.bits[i] < upper) {
        plan.bits[i] += residual / static_cast<double>(interior);
      }
    }
  }
  for (std::size_t i = 0; i < K; ++i) {
    plan.saturated[i] = plan.bits[i] <= 0.0 || plan.bits[i] >= upper;
  }
  return plan;
}

AllocationPlan inverse_weighted_baseline(std::span<const double> weights,
                                         double total_budget, double V) {
  check_weights(weights);
  std::vector<double> inverted(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) inverted[i] = 1.0 / weights[i];
  AllocationPlan plan = waterfill_clipped(inverted, total_budget, V);
  plan.weights.assign(weights.begin(), weights.end());
  return plan;
}

AllocationPlan uniform_allocation(std::span<const double> weights, double total_budget) {
  check_weights(weights);
  if (!(total_budget > 0.0)) throw InvalidParameter("total budget must be positive");
  AllocationPlan plan = make_plan(weights, total_budget, std::nullopt);
  std::fill(plan.bits.begin(), plan.bits.end(),
            total_budget / static_cast<double>(weights.size()));
  return plan;
}

std::vector<int> integerize(const AllocationPlan& plan, double V) {
  const std::size_t K = plan.bits.size();
  const double cap_bits =
      plan.cap ? std::floor(*plan.cap / V) : std::numeric_limits<double>::infinity();
  const long budget_bits = static_cast<long>(std::floor(plan.total_budget / V + 1e-9));
  std::vector<int> bits(K);
  long used = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double rounded = std::clamp(std::round(plan.bits[i] / V), 0.0, cap_bits);
    bits[i] = static_cast<int>(rounded);
    used += bits[i];
  }
  auto term = [&](std::size_t i, int b) { return plan.weights[i] * std::exp2(-2.0 * b); };
  while (used > budget_bits) {
    std::size_t best = K;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K; ++i) {
      if (bits[i] == 0) continue;
      const double cost = term(i, bits[i] - 1) - term(i, bits[i]);
      if (cost < best_cost) {
        best_cost = cost;
        best = i;
      }
    }
    if (best == K) break;
    --bits[best];
    --used;
  }
  while (used < budget_bits) {
    std::size_t best = K;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      if (bits[i] + 1 > cap_bits) continue;
      const double gain = term(i, bits[i]) - term(i, bits[i] + 1);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == K) break;
    ++bits[best];
    ++used;
  }
  return bits;
}

}  // namespace fpld
