#include "fpld/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fpld/error.hpp"

namespace fpld {

ProbVector ProbVector::from_weights(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidParameter("probability weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw InvalidParameter("probability weights sum to zero");
  for (double& w : weights) w /= total;
  const double check = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(check - 1.0) > 1e-12) {
    throw InvalidParameter("renormalized weights do not sum to one");
  }
  return ProbVector(std::move(weights));
}

double log_sum_exp(std::span<const double> logits) {
  if (logits.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - top);
  return top + std::log(sum);
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidParameter("softmax of an empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    p[v] = std::exp(logits[v] - top);
    sum += p[v];
  }
  for (double& x : p) x /= sum;
  return ProbVector(std::move(p));
}

double kl(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw InvalidParameter("kl: dimension mismatch");
  double total = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (p[v] == 0.0) continue;
    if (q[v] == 0.0) return std::numeric_limits<double>::infinity();
    total += p[v] * (std::log(p[v]) - std::log(q[v]));
  }
  return std::max(total, 0.0);
}

double kl_logits(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidParameter("kl_logits: dimension mismatch");
  std::vector<double> eta(a.size());
  for (std::size_t v = 0; v < a.size(); ++v) eta[v] = b[v] - a[v];
  return cumulant_kl_exact(a, eta);
}

double hessian_trace(const ProbVector& p) {
  double sq = 0.0;
  for (double x : p.values()) sq += x * x;
  return 1.0 - sq;
}

namespace {

// e^d - 1 - d without cancellation for small |d|.
double exp_remainder(double d) {
  if (std::abs(d) < 0.5) {
    double term = d * d / 2.0;
    double sum = term;
    for (int k = 3; k < 24; ++k) {
      term *= d / k;
      sum += term;
    }
    return sum;
  }
  return std::expm1(d) - d;
}

}  // namespace

double cumulant_kl_exact(std::span<const double> logits, std::span<const double> eta) {
  if (logits.size() != eta.size()) {
    throw InvalidParameter("cumulant_kl_exact: dimension mismatch");
  }
  const ProbVector p = softmax(logits);
  double mean = 0.0;
  for (std::size_t v = 0; v < eta.size(); ++v) mean += p[v] * eta[v];

  // With d = eta - E[eta]: log E[e^d] = log1p(E[e^d - 1 - d]) since E[d] = 0.
  double spread = 0.0;
  for (double e : eta) spread = std::max(spread, std::abs(e - mean));
  if (spread < 30.0) {
    double acc = 0.0;
    for (std::size_t v = 0; v < eta.size(); ++v) acc += p[v] * exp_remainder(eta[v] - mean);
    return std::max(std::log1p(acc), 0.0);
  }
  // Large perturbations: fall back to the shifted log-partition difference.
  std::vector<double> shifted(logits.size());
  for (std::size_t v = 0; v < logits.size(); ++v) shifted[v] = logits[v] + eta[v];
  return std::max(log_sum_exp(shifted) - log_sum_exp(logits) - mean, 0.0);
}

double nondegeneracy_cp(std::span<const ProbVector> rows) {
  if (rows.empty()) throw InvalidParameter("nondegeneracy_cp needs at least one row");
  double total = 0.0;
  for (const auto& p : rows) total += hessian_trace(p);
  return total / static_cast<double>(rows.size());
}

}  // namespace fpld
