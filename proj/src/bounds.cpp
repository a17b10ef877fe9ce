#include "fpld/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fpld/error.hpp"

namespace fpld {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter("bound parameter: " + what);
}

double bits_per_coord(const BoundParams& p) { return *p.B / p.V; }

double statistical(const BoundParams& p) {
  if (std::isinf(p.n)) return 0.0;
  return p.c1 * p.d / (p.K * p.n);
}

double probe(const BoundParams& p) {
  return p.c2 * p.rho * std::sqrt(p.V * std::log(p.V / p.delta) / p.m);
}

void fill_totals(const BoundParams& p, BoundEstimates& e) {
  e.statistical_term = statistical(p);
  e.probe_term = probe(p);
  e.slack_term = p.eps_opt + p.eps_fit;
  e.total = e.statistical_term + e.probe_term + e.bandwidth_term + e.slack_term;
}

}  // namespace

void BoundParams::validate() const {
  require(d > 0, "d must be positive");
  require(K >= 1, "K must be >= 1");
  require(n > 0, "n must be positive");
  require(m > 0, "m must be positive");
  require(V >= 2, "V must be >= 2");
  require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  require(rho >= 1, "rho must be >= 1");
  require(L > 0 && std::isfinite(L), "L must be positive");
  require(c1 >= 0 && c2 >= 0, "c1, c2 must be non-negative");
  require(eps_opt >= 0 && eps_fit >= 0, "slack terms must be non-negative");
  require(cp >= 0 && cp <= 1, "cp must lie in [0, 1]");
  require(T >= 1, "T must be >= 1");
  require(c0 > 0, "c0 must be positive");
  require(remainder_C > 0, "remainder constant must be positive");
  require(B.has_value() || !B_list.empty(), "one of B or B_list is required");
  if (B) require(*B >= 0, "B must be non-negative");
  if (!B_list.empty()) {
    require(B_list.size() == static_cast<std::size_t>(K), "B_list must have K entries");
    for (double b : B_list) require(b >= 0, "B_i must be non-negative");
  }
  if (!L_list.empty()) {
    require(L_list.size() == static_cast<std::size_t>(K), "L_list must have K entries");
    for (double l : L_list) require(l > 0, "L_i must be positive");
  }
}

BoundEstimates upper_bound_homogeneous(const BoundParams& p) {
  p.validate();
  if (p.heterogeneous()) {
    throw InvalidParameter("per-node budgets given: use upper_bound_heterogeneous");
  }
  BoundEstimates e;
  const double c3 = p.L * p.L / 6.0;
  e.bandwidth_term = c3 / p.K * std::exp2(-2.0 * bits_per_coord(p));
  fill_totals(p, e);
  const auto se = check_small_error(p, p.c0);
  e.se_ok = se.se_ok;
  e.se_prime_ok = se.se_prime_ok;
  return e;
}

BoundEstimates upper_bound_heterogeneous(const BoundParams& p) {
  p.validate();
  BoundEstimates e;
  e.bandwidth_term = het_bandwidth_term(p);
  fill_totals(p, e);
  const auto se = check_small_error(p, p.c0);
  e.se_ok = se.se_ok;
  e.se_prime_ok = se.se_prime_ok;
  return e;
}

LowerBound lower_bound_fpld(const BoundParams& p) {
  p.validate();
  if (p.heterogeneous()) throw InvalidParameter("lower bound needs a homogeneous B");
  const double b = bits_per_coord(p);
  return {p.cp * p.L * p.L / (12.0 * p.K) * std::exp2(-2.0 * b), *p.B < p.V};
}

MultiRoundBound multiround_bound(const BoundParams& p) {
  p.validate();
  if (p.heterogeneous()) throw InvalidParameter("multi-round bound needs a homogeneous B");
  const double tb = p.T * bits_per_coord(p);
  const double c3 = p.L * p.L / 6.0;
  MultiRoundBound r;
  r.value = c3 / p.K * std::exp2(-2.0 * tb);
  r.remainder = std::pow(std::log(p.V), 1.5) / std::pow(p.K, 1.5) * std::exp2(-3.0 * tb);
  return r;
}

double het_bandwidth_term(const BoundParams& p) {
  p.validate();
  const auto K = static_cast<std::size_t>(p.K);
  double sum = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double bi = p.B_list.empty() ? *p.B : p.B_list[i];
    const double li = p.L_list.empty() ? p.L : p.L_list[i];
    sum += li * li * std::exp2(-2.0 * bi / p.V);
  }
  return sum / (6.0 * p.K * p.K);
}

SmallErrorCheck check_small_error(const BoundParams& p, double c0) {
  if (!(c0 > 0)) throw InvalidParameter("c0 must be positive");
  SmallErrorCheck s;
  // Heterogeneous budgets are judged at the worst node.
  double b = 0.0;
  if (p.B_list.empty()) {
    b = *p.B / p.V;
  } else {
    b = *std::min_element(p.B_list.begin(), p.B_list.end()) / p.V;
  }
  const double L = p.L_list.empty()
                       ? p.L
                       : *std::max_element(p.L_list.begin(), p.L_list.end());
  s.lhs = std::exp2(-b) * std::pow(std::log(p.V), 1.5) / std::sqrt(static_cast<double>(p.K));
  s.c0_prime = std::sqrt(3.0) * p.cp / (4.0 * p.remainder_C * L);
  s.se_ok = s.lhs <= c0;
  s.se_prime_ok = s.lhs <= s.c0_prime;
  return s;
}

}  // namespace fpld
