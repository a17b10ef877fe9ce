#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fpld/error.hpp"
#include "fpld/rng.hpp"
#include "fpld/softmax.hpp"

using namespace fpld;

TEST_CASE("softmax basics") {
  const auto u = softmax(std::vector<double>(5, 0.0));
  for (double x : u.values()) CHECK(x == doctest::Approx(0.2));
  const auto p = softmax(std::vector<double>{std::log(3.0), 0.0});
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));

  std::vector<double> l{0.3, -1.2, 2.5, 0.0}, l100 = l;
  for (double& x : l100) x += 100.0;
  const auto a = softmax(l), b = softmax(l100);
  for (std::size_t i = 0; i < l.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);

  const auto big = softmax(std::vector<double>{1000.0, 999.0});
  CHECK(std::isfinite(big[0]));
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("kl") {
  const auto p = ProbVector::from_weights({1, 0});
  const auto q = ProbVector::from_weights({1, 1});
  CHECK(kl(p, q) == doctest::Approx(std::log(2.0)));
  CHECK(kl(q, q) == 0.0);
  CHECK(std::isinf(kl(q, p)));

  const rng::StreamKey key{1, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = 3 * rng::normal(key, c++);
      b[i] = 3 * rng::normal(key, c++);
    }
    REQUIRE(kl(softmax(a), softmax(b)) >= 0.0);
  }
  CHECK_THROWS_AS(ProbVector::from_weights({-1, 2}), InvalidParameter);
  CHECK_THROWS_AS(ProbVector::from_weights({0, 0}), InvalidParameter);
}

TEST_CASE("hessian trace") {
  CHECK(hessian_trace(ProbVector::from_weights(std::vector<double>(8, 1))) == doctest::Approx(1 - 1.0 / 8));
  CHECK(hessian_trace(ProbVector::from_weights({0, 1, 0})) == 0.0);
}

TEST_CASE("hessian trace matches a finite-difference log-partition Hessian") {
  const rng::StreamKey key{2, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  for (int V = 2; V <= 8; ++V) {
    for (int t = 0; t < 20; ++t) {
      std::vector<double> l(V);
      for (double& x : l) x = rng::normal(key, c++);
      const double h = 1e-4;
      double trace = 0.0;
      for (int v = 0; v < V; ++v) {
        auto plus = l, minus = l;
        plus[v] += h;
        minus[v] -= h;
        trace += (log_sum_exp(plus) - 2 * log_sum_exp(l) + log_sum_exp(minus)) / (h * h);
      }
      CHECK(std::abs(trace - hessian_trace(softmax(l))) <= 1e-6);
    }
  }
}

TEST_CASE("cumulant identity") {
  std::vector<double> l{0.5, -1.0, 2.0, 0.1};
  CHECK(cumulant_kl_exact(l, std::vector<double>(4, 0.0)) == 0.0);
  CHECK(cumulant_kl_exact(l, std::vector<double>(4, 3.7)) <= 1e-16);

  const rng::StreamKey key{3, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(16), eta(16), b(16);
    for (int i = 0; i < 16; ++i) {
      a[i] = rng::normal(key, c++);
      eta[i] = rng::normal(key, c++);
      b[i] = a[i] + eta[i];
    }
    const double direct = kl(softmax(a), softmax(b));
    CHECK(cumulant_kl_exact(a, eta) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(kl_logits(a, b) == doctest::Approx(direct).epsilon(1e-12));
  }
  // Large perturbations take the log-partition path.
  std::vector<double> eta{40.0, -40.0, 0.0, 1.0};
  std::vector<double> b(4);
  for (int i = 0; i < 4; ++i) b[i] = l[i] + eta[i];
  CHECK(cumulant_kl_exact(l, eta) == doctest::Approx(kl(softmax(l), softmax(b))).epsilon(1e-12));
}

TEST_CASE("second-order prediction (sigma^2/2) * trace") {
  const rng::StreamKey key{4, rng::Purpose::kTest, 0, 0, 0};
  std::vector<double> l(64);
  for (int i = 0; i < 64; ++i) l[i] = 0.5 * rng::normal(key, i);
  const double tr = hessian_trace(softmax(l));
  for (double sigma : {1e-2, 1e-3}) {
    std::uint64_t c = 1000;
    double total = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      std::vector<double> eta(64);
      for (double& x : eta) x = sigma * rng::normal(key, c++);
      total += cumulant_kl_exact(l, eta);
    }
    const double ratio = total / trials / (sigma * sigma / 2 * tr);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
}

TEST_CASE("nondegeneracy constant") {
  std::vector<ProbVector> rows{ProbVector::from_weights({1, 1, 1, 1}),
                               ProbVector::from_weights({0, 0, 1, 0})};
  CHECK(nondegeneracy_cp(rows) == doctest::Approx(0.375));
  CHECK_THROWS_AS(nondegeneracy_cp(std::vector<ProbVector>{}), InvalidParameter);
}
