#include "fpld/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "fpld/error.hpp"

namespace fpld {

double post_quantization_range(double clip, int bits_per_coord) {
  return clip * (1.0 + std::ldexp(1.0, -bits_per_coord));
}

WeightEstimate estimate_weights(const WarmupRecord& rec, double delta) {
  if (rec.K == 0 || rec.T0 == 0 || rec.m == 0 || rec.V == 0) {
    throw InvalidParameter("warm-up record needs K, T0, m, V >= 1");
  }
  if (rec.values.size() != rec.K * rec.T0 * rec.m * rec.V) {
    throw InvalidParameter("warm-up record is missing entries");
  }
  if (rec.clips.size() != rec.K) throw InvalidParameter("warm-up record needs one clip per node");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");

  WeightEstimate est;
  est.delta = delta;
  est.w_hat.assign(rec.K, 0.0);
  for (std::size_t i = 0; i < rec.K; ++i) {
    const double R = post_quantization_range(rec.clips[i], rec.pilot_bits);
    est.R_ell = std::max(est.R_ell, R);
    double total = 0.0;
    for (std::size_t t = 0; t < rec.T0; ++t) {
      for (std::size_t l = 0; l < rec.m; ++l) {
        double block = 0.0;
        for (std::size_t v = 0; v < rec.V; ++v) {
          const double x = rec.at(i, t, l, v);
          block += x * x;
        }
        block /= static_cast<double>(rec.V);
        // Reconstructions never leave [-R, R]; a block outside [0, R^2]
        // means the record did not come from this channel.
        if (!(block <= R * R * (1.0 + 1e-12))) {
          throw ProtocolError("warm-up block mean of squares exceeds R_ell^2");
        }
        total += block;
      }
    }
    est.w_hat[i] = total / static_cast<double>(rec.T0 * rec.m);
  }
  const auto K = static_cast<double>(rec.K);
  const auto samples = static_cast<double>(rec.m * rec.T0);
  est.eta_bound =
      est.R_ell * est.R_ell * std::sqrt(std::log(2.0 * K / delta) / (2.0 * samples));
  return est;
}

AllocationPlan adaptive_allocate(const WeightEstimate& est, double total_budget, double V,
                                 std::optional<double> cap, double floor_ratio) {
  if (est.w_hat.empty()) throw InvalidParameter("no weight estimates");
  const double top = *std::max_element(est.w_hat.begin(), est.w_hat.end());
  if (!(top > 0.0)) throw InvalidParameter("all weight estimates are zero");
  std::vector<double> w = est.w_hat;
  const double floor = floor_ratio * top;
  for (double& x : w) {
    if (x < floor) {
      std::cerr << "warning: weight estimate " << x << " raised to floor " << floor << '\n';
      x = floor;
    }
  }
  // waterfill_clipped re-solves on the unsaturated subset after pinning.
  return waterfill_clipped(w, total_budget, V, cap);
}

double suboptimality_ratio(std::span<const double> w_true, std::span<const double> w_hat,
                           double total_budget, double V) {
  if (w_true.size() != w_hat.size()) throw InvalidParameter("weight length mismatch");
  const AllocationPlan best = waterfill_clipped(w_true, total_budget, V);
  const AllocationPlan plug = waterfill_clipped(w_hat, total_budget, V);
  return objective_F(plug.bits, w_true, V) / objective_F(best.bits, w_true, V);
}

double suboptimality_identity(std::span<const double> w_true, std::span<const double> w_hat) {
  if (w_true.size() != w_hat.size() || w_true.empty()) {
    throw InvalidParameter("weight length mismatch");
  }
  const auto K = static_cast<double>(w_true.size());
  double log_geo_true = 0.0;
  double log_geo_hat = 0.0;
  for (std::size_t i = 0; i < w_true.size(); ++i) {
    log_geo_true += std::log(w_true[i]);
    log_geo_hat += std::log(w_hat[i]);
  }
  const double scale = std::exp((log_geo_hat - log_geo_true) / K);
  double sum = 0.0;
  for (std::size_t i = 0; i < w_true.size(); ++i) sum += w_true[i] / w_hat[i];
  return sum / K * scale;
}

}  // namespace fpld
