#include "fpld/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <quadmath.h>

#include "fpld/adaptive.hpp"
#include "fpld/alloc.hpp"
#include "fpld/quant.hpp"
#include "fpld/rng.hpp"
#include "fpld/softmax.hpp"
#include "fpld/stats.hpp"
#include "fpld/wire.hpp"

namespace fpld {
namespace {

// KL(softmax(l) || softmax(l + eta)) by the direct formula in quad precision,
// with the shift itself formed in quad so the oracle sees the exact eta.
double reference_kl(const std::vector<double>& l, const std::vector<double>& eta) {
  const std::size_t V = l.size();
  std::vector<__float128> a(V), b(V);
  for (std::size_t v = 0; v < V; ++v) {
    a[v] = l[v];
    b[v] = static_cast<__float128>(l[v]) + eta[v];
  }
  auto lse = [](const std::vector<__float128>& x) {
    const __float128 mx = *std::max_element(x.begin(), x.end());
    __float128 s = 0;
    for (__float128 v : x) s += expq(v - mx);
    return mx + logq(s);
  };
  const __float128 la = lse(a), lb = lse(b);
  __float128 out = 0;
  for (std::size_t v = 0; v < V; ++v) out += expq(a[v] - la) * ((a[v] - la) - (b[v] - lb));
  return static_cast<double>(out);
}

class Draws {
 public:
  explicit Draws(std::uint64_t seed, std::uint32_t stream)
      : key_{seed, rng::Purpose::kTest, 0, 0, stream} {}
  double uniform() { return rng::uniform(key_, next_++); }
  double normal() { return rng::normal(key_, next_++); }

 private:
  rng::StreamKey key_;
  std::uint64_t next_ = 0;
};

}  // namespace

std::vector<PropertyResult> run_validation(const ValidationOptions& opt) {
  std::vector<PropertyResult> out;

  {  // Dither channel: unbiased, variance step^2/12, uniform error.
    const QuantizerSpec spec = make_quantizer(1.0, 4);
    const std::size_t n = 200000;
    Draws inputs(opt.seed, 1);
    std::vector<double> err(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = 0.9 * (2.0 * inputs.uniform() - 1.0);
      const DitherStream ds{opt.seed, 0, 0, static_cast<std::uint32_t>(j / 256)};
      const double u = ds.at(j % 256, spec.step);
      err[j] = decode(spec, encode(spec, x, u), u) + opt.quantizer_bias - x;
    }
    const double z = std::abs(stats::mean(err)) / stats::standard_error(err);
    out.push_back({"dither_unbiased", "|mean|/stderr", z, 4.0, z <= 4.0});
    const double rel = std::abs(stats::variance(err) / (spec.step * spec.step / 12.0) - 1.0);
    out.push_back({"dither_variance", "|var/(step^2/12) - 1|", rel, 0.02, rel <= 0.02});
    const auto ks = stats::ks_uniform(err, -spec.step / 2, spec.step / 2);
    out.push_back({"dither_uniform", "KS p-value", ks.p_value, 0.001, ks.p_value >= 0.001});
  }

  {  // Cumulant identity against an extended-precision KL.
    Draws d(opt.seed, 2);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t V = trial % 3 == 0 ? 2 : (trial % 3 == 1 ? 16 : 256);
      std::vector<double> logits(V), eta(V);
      for (std::size_t v = 0; v < V; ++v) {
        logits[v] = 2.0 * d.normal();
        eta[v] = d.normal();
      }
      const double ref = reference_kl(logits, eta);
      const double got = cumulant_kl_exact(logits, eta);
      worst = std::max(worst, std::abs((got - ref) / ref));
    }
    out.push_back({"cumulant_identity", "max relative error", worst, 1e-12, worst <= 1e-12});
  }

  {  // Trace lemma: 1 - max p <= 1 - ||p||^2 <= 1.
    Draws d(opt.seed, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<double> w(2 + trial % 30);
      for (double& x : w) x = -std::log1p(-d.uniform());
      const ProbVector p = ProbVector::from_weights(w);
      const double tr = hessian_trace(p);
      const double pmax = *std::max_element(p.values().begin(), p.values().end());
      worst = std::max({worst, (1.0 - pmax) - tr, tr - 1.0});
    }
    out.push_back({"trace_lemma", "max violation", worst, 1e-15, worst <= 1e-15});
  }

  {  // Active-set water-filling agrees with the KKT bisection oracle.
    Draws d(opt.seed, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t K = 1 + static_cast<std::size_t>(d.uniform() * 64);
      std::vector<double> w(K);
      for (double& x : w) x = std::exp(4.0 * d.normal());
      const double V = 256;
      const double total = V * (0.5 + 4.0 * d.uniform()) * static_cast<double>(K);
      std::optional<double> cap;
      if (trial % 2 == 0) cap = total / static_cast<double>(K) * (1.2 + d.uniform());
      const auto a = waterfill_clipped(w, total, V, cap);
      const auto b = kkt_oracle(w, total, V, cap);
      for (std::size_t i = 0; i < K; ++i) worst = std::max(worst, std::abs(a.bits[i] - b.bits[i]));
    }
    out.push_back({"waterfill_oracle", "max |B - B_kkt| (bits)", worst, 1e-6, worst <= 1e-6});
  }

  {  // Transfer lemma: ratio <= 1 + 2 eta + 4 eta^2.
    Draws d(opt.seed, 5);
    double worst = -INFINITY;
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t K = 2 + trial % 15;
      const double eta = 0.5 * d.uniform();
      std::vector<double> w(K), w_hat(K);
      for (std::size_t i = 0; i < K; ++i) {
        w[i] = std::exp(d.normal());
        w_hat[i] = w[i] * (1.0 + eta * (2.0 * d.uniform() - 1.0));
      }
      const double ratio = suboptimality_identity(w, w_hat);
      worst = std::max(worst, ratio - (1.0 + 2.0 * eta + 4.0 * eta * eta));
    }
    out.push_back({"transfer_lemma", "max(ratio - bound)", worst, 0.0, worst <= 0.0});
  }

  {  // Wire round trip.
    Draws d(opt.seed, 6);
    bool ok = true;
    int trials = 0;
    for (; trials < 1000 && ok; ++trials) {
      wire::PayloadHeader h;
      h.node_id = static_cast<std::uint16_t>(d.uniform() * 65536);
      h.round = static_cast<std::uint16_t>(d.uniform() * 65536);
      h.probe_count = 1 + static_cast<std::uint32_t>(d.uniform() * 4);
      h.vocab = 1 + static_cast<std::uint32_t>(d.uniform() * 20);
      h.bits_per_coord = static_cast<std::uint8_t>(d.uniform() * 33);
      h.clip = 0.1 + d.uniform();
      h.dither_seed = static_cast<std::uint64_t>(d.uniform() * 9.0e18);
      std::vector<std::uint32_t> idx(static_cast<std::size_t>(h.probe_count) * h.vocab);
      const double cells = std::ldexp(1.0, h.bits_per_coord);
      for (auto& x : idx) x = static_cast<std::uint32_t>(d.uniform() * cells);
      const auto bytes = wire::pack(h, idx);
      const auto back = wire::unpack(bytes);
      ok = back.header == h && back.indices == idx &&
           bytes.size() == wire::kHeaderSize + (wire::body_bits(h) + 7) / 8;
    }
    out.push_back({"wire_roundtrip", "payloads checked", static_cast<double>(trials), 1000,
                   ok && trials == 1000});
  }
  return out;
}

}  // namespace fpld
