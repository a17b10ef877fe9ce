#include <doctest.h>

#include <cmath>
#include <limits>

#include "fpld/bounds.hpp"
#include "fpld/error.hpp"
#include "fpld/rng.hpp"

using namespace fpld;

namespace {

BoundParams base() {
  BoundParams p;
  p.K = 4;
  p.V = 256;
  p.d = 256;
  p.B = 4 * 256.0;
  return p;
}

}  // namespace

TEST_CASE("homogeneous upper bound terms") {
  BoundParams p = base();
  const auto e = upper_bound_homogeneous(p);
  CHECK(e.bandwidth_term == doctest::Approx(std::ldexp(1.0, -8) / 24).epsilon(1e-15));
  CHECK(e.bandwidth_term == doctest::Approx(1.6276e-4).epsilon(1e-4));
  CHECK(e.statistical_term == doctest::Approx(256.0 / (4 * 30000.0)));
  CHECK(e.probe_term == doctest::Approx(std::sqrt(256 * std::log(256 / 0.05) / 64)));
  CHECK(e.total == doctest::Approx(e.statistical_term + e.probe_term + e.bandwidth_term + e.slack_term));

  BoundParams q = p;
  q.K = 8;
  const auto e8 = upper_bound_homogeneous(q);
  CHECK(e8.bandwidth_term == e.bandwidth_term / 2);
  CHECK(e8.statistical_term == doctest::Approx(e.statistical_term / 2).epsilon(1e-15));

  q = p;
  q.B = 1e6;
  const auto big = upper_bound_homogeneous(q);
  CHECK(big.bandwidth_term == 0.0);
  CHECK(big.total == doctest::Approx(big.statistical_term + big.probe_term + big.slack_term));

  q = p;
  q.n = std::numeric_limits<double>::infinity();
  CHECK(upper_bound_homogeneous(q).statistical_term == 0.0);

  q = p;
  q.B_list = {1, 2, 3, 4};
  CHECK_THROWS_AS(upper_bound_homogeneous(q), InvalidParameter);
  q = p;
  q.delta = 1.5;
  CHECK_THROWS_AS(upper_bound_homogeneous(q), InvalidParameter);
}

TEST_CASE("lower bound") {
  BoundParams p = base();
  p.cp = 0.9;
  CHECK(lower_bound_fpld(p).value == doctest::Approx(0.9 / 48 * std::ldexp(1.0, -8)));
  CHECK(lower_bound_fpld(p).value == doctest::Approx(7.324e-5).epsilon(1e-3));
  CHECK_FALSE(lower_bound_fpld(p).out_of_regime);
  p.cp = 0;
  CHECK(lower_bound_fpld(p).value == 0.0);
  p.B = 100;
  CHECK(lower_bound_fpld(p).out_of_regime);
}

TEST_CASE("multi-round bound") {
  BoundParams p = base();
  CHECK(multiround_bound(p).value == upper_bound_homogeneous(p).bandwidth_term);
  p.T = 3;
  CHECK(multiround_bound(p).value == doctest::Approx(std::ldexp(1.0, -24) / 24));
  CHECK(multiround_bound(p).value == doctest::Approx(2.483e-9).epsilon(1e-3));
  BoundParams a = base(), b = base();
  a.B = b.B = 512;
  b.T = 2;
  CHECK(multiround_bound(b).value / multiround_bound(a).value == doctest::Approx(1.0 / 16));
}

TEST_CASE("heterogeneous bandwidth term") {
  BoundParams p;
  p.K = 2;
  p.V = 2;  // V = 1 is outside BoundParams' range; scale B with V instead
  p.B_list = {2, 6};
  CHECK(het_bandwidth_term(p) == doctest::Approx((1.0 / 6) / 4 * (0.25 + 1.0 / 64)));
  CHECK(het_bandwidth_term(p) == doctest::Approx(0.011068).epsilon(1e-4));

  BoundParams q;
  q.K = 4;
  q.V = 256;
  q.L_list = {1, 1, 4, 4};
  q.B_list = {512, 512, 512, 512};
  CHECK(het_bandwidth_term(q) == doctest::Approx(34.0 / 1536));

  BoundParams u = base();
  BoundParams h = base();
  h.B_list = {1024, 1024, 1024, 1024};
  CHECK(std::abs(het_bandwidth_term(h) - upper_bound_homogeneous(u).bandwidth_term) <= 1e-15);

  h.B_list = {1, 2};
  CHECK_THROWS_AS(het_bandwidth_term(h), InvalidParameter);
}

TEST_CASE("small-error checks") {
  BoundParams p = base();
  p.B = 256;
  const auto s = check_small_error(p, 0.5);
  CHECK(s.lhs == doctest::Approx(0.5 * std::pow(std::log(256.0), 1.5) / 2));
  CHECK(s.lhs == doctest::Approx(3.27).epsilon(0.01));
  CHECK_FALSE(s.se_ok);
  p.B = 256 * 40.0;
  CHECK(check_small_error(p, 0.5).se_ok);
  CHECK(check_small_error(p, 0.5).se_prime_ok);
  p.B = 256;
  p.K = 1 << 20;
  CHECK(check_small_error(p, 0.5).se_ok);
}

TEST_CASE("bracket ordering and monotonicity") {
  const rng::StreamKey key{9, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  auto u = [&] { return rng::uniform(key, c++); };
  for (int t = 0; t < 2000; ++t) {
    BoundParams p;
    p.K = 1 + static_cast<int>(u() * 32);
    p.V = 2 + std::floor(u() * 500);
    p.d = 1 + u() * 1000;
    p.n = 10 + u() * 1e5;
    p.m = 1 + u() * 500;
    p.L = 0.1 + 4 * u();
    p.rho = 1 + 3 * u();
    p.cp = u();
    p.B = p.V * (1 + 8 * u());
    const auto e = upper_bound_homogeneous(p);
    REQUIRE(lower_bound_fpld(p).value <= e.bandwidth_term);

    auto bumped = [&](auto mutate) {
      BoundParams q = p;
      mutate(q);
      return upper_bound_homogeneous(q).total;
    };
    REQUIRE(bumped([](BoundParams& q) { q.K += 1; }) <= e.total);
    REQUIRE(bumped([](BoundParams& q) { q.n *= 2; }) <= e.total);
    REQUIRE(bumped([](BoundParams& q) { q.m *= 2; }) <= e.total);
    REQUIRE(bumped([](BoundParams& q) { *q.B += 1; }) <= e.total);
    REQUIRE(bumped([](BoundParams& q) { q.L *= 1.1; }) >= e.total);
    REQUIRE(bumped([](BoundParams& q) { q.rho *= 1.1; }) >= e.total);
    REQUIRE(bumped([](BoundParams& q) { q.d *= 1.1; }) >= e.total);
  }
}
