#pragma once

// Numerics on the probability simplex.

#include <span>
#include <vector>

namespace fpld {

/// A point of the simplex. Only built through softmax or explicit
/// normalization, so entries are non-negative and sum to one within 1e-12.
class ProbVector {
 public:
  /// Renormalizes non-negative weights. Throws InvalidParameter on negative,
  /// non-finite or all-zero input.
  static ProbVector from_weights(std::vector<double> weights);

  std::span<const double> values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

 private:
  explicit ProbVector(std::vector<double> p) : p_(std::move(p)) {}
  friend ProbVector softmax(std::span<const double> logits);
  std::vector<double> p_;
};

/// log(sum_v exp(x_v)), max-shifted.
double log_sum_exp(std::span<const double> logits);

ProbVector softmax(std::span<const double> logits);

/// sum_v p_v log(p_v / q_v) with 0 log 0 = 0. Returns +infinity when q_v = 0
/// where p_v > 0 (support violation).
double kl(const ProbVector& p, const ProbVector& q);

/// KL(softmax(a) || softmax(b)) computed from logits in log space.
double kl_logits(std::span<const double> a, std::span<const double> b);

/// Trace of diag(p) - p p^T, i.e. 1 - ||p||^2.
double hessian_trace(const ProbVector& p);

/// log E_{Y~p*}[e^{eta_Y}] - E_{Y~p*}[eta_Y] with p* = softmax(logits).
/// Equals KL(softmax(logits) || softmax(logits + eta)).
double cumulant_kl_exact(std::span<const double> logits, std::span<const double> eta);

/// Average hessian_trace over probe rows: the empirical non-degeneracy constant.
double nondegeneracy_cp(std::span<const ProbVector> rows);

}  // namespace fpld
