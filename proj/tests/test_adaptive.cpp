#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpld/adaptive.hpp"
#include "fpld/error.hpp"
#include "fpld/quant.hpp"
#include "fpld/rng.hpp"

using namespace fpld;

namespace {

WarmupRecord constant_record(double c) {
  WarmupRecord rec;
  rec.K = 2;
  rec.T0 = 2;
  rec.m = 3;
  rec.V = 4;
  rec.clips = {1, 1};
  rec.pilot_bits = 2;
  rec.values.assign(rec.K * rec.T0 * rec.m * rec.V, c);
  return rec;
}

}  // namespace

TEST_CASE("estimate_weights on constant records") {
  const auto est = estimate_weights(constant_record(0.5));
  CHECK(est.w_hat[0] == doctest::Approx(0.25));
  CHECK(est.w_hat[1] == doctest::Approx(0.25));
  CHECK(est.R_ell == doctest::Approx(1.25));
  CHECK(est.eta_bound == doctest::Approx(1.25 * 1.25 * std::sqrt(std::log(2 * 2 / 0.05) / (2 * 6))));

  auto missing = constant_record(0.5);
  missing.values.pop_back();
  CHECK_THROWS_AS(estimate_weights(missing), InvalidParameter);
  CHECK_THROWS_AS(estimate_weights(constant_record(1.3)), ProtocolError);
}

TEST_CASE("second-moment ratio follows clip^2") {
  // Same relative profile sent through clips 4 and 1 at 2 bits.
  WarmupRecord rec;
  rec.K = 2;
  rec.T0 = 1;
  rec.m = 10000;
  rec.V = 1;
  rec.clips = {4, 1};
  rec.pilot_bits = 2;
  rec.values.resize(2 * rec.m);
  const rng::StreamKey key{5, rng::Purpose::kTest, 0, 0, 0};
  for (std::size_t l = 0; l < rec.m; ++l) {
    const double profile = 0.8 * (2 * rng::uniform(key, l) - 1);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto q = make_quantizer(rec.clips[i], 2);
      const DitherStream ds{6, static_cast<std::uint16_t>(i), 1, static_cast<std::uint32_t>(l)};
      const double u = ds.at(0, q.step);
      rec.at(i, 0, l, 0) = decode(q, encode(q, rec.clips[i] * profile, u), u);
    }
  }
  const auto est = estimate_weights(rec);
  CHECK(est.w_hat[0] / est.w_hat[1] == doctest::Approx(16).epsilon(0.10));
}

TEST_CASE("Hoeffding radius covers the estimation error") {
  // Records i.i.d. uniform on [-R, R] with a known second moment R^2/3.
  const double delta = 0.1;
  int covered = 0;
  const int replays = 1000;
  for (int r = 0; r < replays; ++r) {
    WarmupRecord rec;
    rec.K = 2;
    rec.T0 = 1;
    rec.m = 50;
    rec.V = 4;
    rec.clips = {1, 1};
    rec.pilot_bits = 3;
    const double R = post_quantization_range(1, 3);
    rec.values.resize(rec.K * rec.m * rec.V);
    const rng::StreamKey key{7, rng::Purpose::kTest, 0, 0, static_cast<std::uint32_t>(r)};
    for (std::size_t j = 0; j < rec.values.size(); ++j) rec.values[j] = R * (2 * rng::uniform(key, j) - 1);
    const auto est = estimate_weights(rec, delta);
    const double w = R * R / 3;
    covered += std::abs(est.w_hat[0] - w) <= est.eta_bound && std::abs(est.w_hat[1] - w) <= est.eta_bound;
  }
  CHECK(covered >= (1 - delta) * replays);
}

TEST_CASE("adaptive_allocate") {
  WeightEstimate est;
  est.w_hat = {1, 1, 16, 16};
  const auto plan = adaptive_allocate(est, 2048, 256);
  CHECK(plan.bits == waterfill_clipped(est.w_hat, 2048, 256).bits);

  est.w_hat = {1, 1024};
  const auto sat = adaptive_allocate(est, 2, 1, 1.5);
  CHECK(sat.bits[0] == doctest::Approx(0.5));
  CHECK(sat.bits[1] == doctest::Approx(1.5));

  est.w_hat = {0, 4};
  const auto floored = adaptive_allocate(est, 20, 2);
  CHECK(std::isfinite(floored.bits[0]));
  CHECK(floored.bits[0] + floored.bits[1] == doctest::Approx(20));
}

TEST_CASE("suboptimality ratio") {
  const std::vector<double> w{1, 1, 16, 16};
  CHECK(suboptimality_ratio(w, w, 2048, 256) == doctest::Approx(1.0));
  std::vector<double> scaled{3, 3, 48, 48};
  CHECK(suboptimality_ratio(w, scaled, 2048, 256) == doctest::Approx(1.0));

  const std::vector<double> w2{1, 1}, h2{1.2, 0.8};
  const double expected = 0.5 * (1 / 1.2 + 1 / 0.8) * std::sqrt(0.96);
  CHECK(suboptimality_identity(w2, h2) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(suboptimality_ratio(w2, h2, 4096, 256) == doctest::Approx(1.0206).epsilon(1e-4));

  const std::vector<double> w3{1, 2}, h3{1.1, 1.8};
  CHECK(suboptimality_ratio(w3, h3, 4096, 256) <= 1 + 2 * 0.1 + 4 * 0.01);

  const rng::StreamKey key{8, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> w(5), h(5);
    for (int i = 0; i < 5; ++i) {
      w[i] = std::exp(rng::normal(key, c++));
      h[i] = w[i] * (1 + 0.4 * (rng::uniform(key, c++) - 0.5));
    }
    // Large budget: no clipping, so the identity is exact.
    const double ratio = suboptimality_ratio(w, h, 5 * 4096, 64);
    REQUIRE(ratio >= 1 - 1e-12);
    REQUIRE(std::abs(ratio - suboptimality_identity(w, h)) <= 1e-12);
  }
}
