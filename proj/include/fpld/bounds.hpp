#pragma once

// Closed-form rate expressions for bandwidth-limited federated logit
// distillation. Constants c1 and c2 are illustrative; the bandwidth
// coefficient defaults to the dithered-quantizer value L^2 / 6.

#include <limits>
#include <optional>
#include <vector>

namespace fpld {

struct BoundParams {
  double d = 256;         // parameter dimension
  int K = 1;              // nodes
  double n = 30000;       // samples per node; +inf means exact logits
  double m = 64;          // probe contexts
  double V = 256;         // vocabulary
  double delta = 0.05;    // failure probability
  double rho = 1.0;       // probe coverage ratio
  double L = 1.0;         // clip level (uniform)
  std::vector<double> L_list;  // optional per-node clips
  double c1 = 1.0;
  double c2 = 1.0;
  double eps_opt = 0.0;
  double eps_fit = 0.0;
  double cp = 1.0;        // non-degeneracy constant
  int T = 1;              // rounds
  std::optional<double> B;     // homogeneous bits per probe context
  std::vector<double> B_list;  // per-node bits per probe context
  double c0 = 1.0;             // small-error threshold
  double remainder_C = 1.0;    // cubic-remainder constant used by (SE')

  bool heterogeneous() const { return !B_list.empty(); }
  /// Throws InvalidParameter on any range violation.
  void validate() const;
};

struct BoundEstimates {
  double statistical_term = 0;
  double probe_term = 0;
  double bandwidth_term = 0;
  double slack_term = 0;
  double total = 0;
  bool se_ok = false;
  bool se_prime_ok = false;
};

BoundEstimates upper_bound_homogeneous(const BoundParams& p);
BoundEstimates upper_bound_heterogeneous(const BoundParams& p);

struct LowerBound {
  double value = 0;
  bool out_of_regime = false;  // B < V, outside the bound's stated range
};

LowerBound lower_bound_fpld(const BoundParams& p);

struct MultiRoundBound {
  double value = 0;
  double remainder = 0;  // (log V)^{3/2} / K^{3/2} * 2^{-3TB/V}, diagnostic only
};

MultiRoundBound multiround_bound(const BoundParams& p);

/// (1/(6K^2)) sum_i L_i^2 2^{-2B_i/V}; uses the uniform L when L_list is empty.
double het_bandwidth_term(const BoundParams& p);

struct SmallErrorCheck {
  double lhs = 0;         // 2^{-B/V} (ln V)^{3/2} / sqrt(K)
  double c0_prime = 0;    // sqrt(3) c_p / (4 C L)
  bool se_ok = false;
  bool se_prime_ok = false;
};

SmallErrorCheck check_small_error(const BoundParams& p, double c0);

}  // namespace fpld
