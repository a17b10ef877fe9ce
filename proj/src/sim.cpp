#include "fpld/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <tuple>

#include "fpld/adaptive.hpp"
#include "fpld/alloc.hpp"
#include "fpld/bounds.hpp"
#include "fpld/error.hpp"
#include "fpld/quant.hpp"
#include "fpld/rng.hpp"
#include "fpld/wire.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fpld {
namespace {

using Matrix = std::vector<double>;  // m x V, probe-major

// Runs fn(i) for i in [0, count) into a preallocated slot each, so the
// result does not depend on scheduling.
template <class Fn>
std::vector<double> parallel_map(std::size_t count, int jobs, Fn fn) {
  std::vector<double> out(count);
  std::exception_ptr failure;
#ifdef _OPENMP
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (std::size_t i = 0; i < count; ++i) {
    try {
      out[i] = fn(i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(fpld_parallel_map)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  (void)jobs;
  if (failure) std::rethrow_exception(failure);
  return out;
}

// One node's uplink for one round: quantize every probe row, pack, check the
// budget law, unpack, and decode on the aggregator side.
Matrix transmit(const QuantizerSpec& spec, const Matrix& rows, int m, int V, int node,
                int round, std::uint64_t stream_seed, std::vector<std::uint8_t>* capture) {
  const auto mV = static_cast<std::size_t>(m) * static_cast<std::size_t>(V);
  std::vector<std::uint32_t> indices(mV);
  for (int l = 0; l < m; ++l) {
    const DitherStream ds{stream_seed, static_cast<std::uint16_t>(node),
                          static_cast<std::uint16_t>(round), static_cast<std::uint32_t>(l)};
    const auto row = std::span<const double>(rows).subspan(static_cast<std::size_t>(l) * V, V);
    const QuantizedVector q = quantize_vector(spec, row, ds);
    std::copy(q.indices.begin(), q.indices.end(), indices.begin() + static_cast<std::ptrdiff_t>(l) * V);
  }

  wire::PayloadHeader header;
  header.node_id = static_cast<std::uint16_t>(node);
  header.round = static_cast<std::uint16_t>(round);
  header.probe_count = static_cast<std::uint32_t>(m);
  header.vocab = static_cast<std::uint32_t>(V);
  header.bits_per_coord = static_cast<std::uint8_t>(spec.bits_per_coord);
  header.clip = spec.clip;
  header.dither_seed = stream_seed;
  const std::vector<std::uint8_t> bytes = wire::pack(header, indices);

  const std::uint64_t budget = static_cast<std::uint64_t>(mV) * spec.bits_per_coord;
  if (wire::body_bits(header) != budget || bytes.size() != wire::kHeaderSize + (budget + 7) / 8) {
    throw Error("budget law violated: payload body is not m * V * bits");
  }
  if (capture != nullptr) wire::append_capture(*capture, bytes);

  const wire::Payload received = wire::unpack(bytes);
  const QuantizerSpec rx = make_quantizer(received.header.clip, received.header.bits_per_coord);
  Matrix recon(mV);
  for (int l = 0; l < m; ++l) {
    const DitherStream ds{received.header.dither_seed, received.header.node_id,
                          received.header.round, static_cast<std::uint32_t>(l)};
    const auto idx = std::span<const std::uint32_t>(received.indices)
                         .subspan(static_cast<std::size_t>(l) * V, V);
    const std::vector<double> r = dequantize_vector(rx, idx, ds);
    std::copy(r.begin(), r.end(), recon.begin() + static_cast<std::ptrdiff_t>(l) * V);
  }
  return recon;
}

Matrix observe_all(const SimConfig& cfg, const Truth& truth, std::uint64_t stream_seed,
                   int node, double clip, double scale) {
  Matrix out(static_cast<std::size_t>(cfg.m) * cfg.V);
  for (int l = 0; l < cfg.m; ++l) {
    const auto obs = node_observe(truth.logits[l], cfg.n, clip, stream_seed, node, l);
    for (int v = 0; v < cfg.V; ++v) out[static_cast<std::size_t>(l) * cfg.V + v] = scale * obs[v];
  }
  return out;
}

double mean_kl(const std::vector<std::vector<double>>& targets, const Matrix& aggregate,
               int m, int V) {
  double sum = 0.0;
  for (int l = 0; l < m; ++l) {
    const auto row = std::span<const double>(aggregate).subspan(static_cast<std::size_t>(l) * V, V);
    sum += kl_logits(targets[l], row);
  }
  return sum / m;
}

void check_truth(const SimConfig& cfg, const Truth& truth) {
  if (truth.logits.size() != static_cast<std::size_t>(cfg.m)) {
    throw InvalidParameter("truth has " + std::to_string(truth.logits.size()) +
                           " probes, config expects " + std::to_string(cfg.m));
  }
  if (!truth.logits.empty() && truth.logits[0].size() != static_cast<std::size_t>(cfg.V)) {
    throw InvalidParameter("truth vocabulary does not match config");
  }
}

void require_seeds(const SimConfig& cfg) {
  if (cfg.seeds.empty()) throw InvalidParameter("seed list is empty");
}

BoundParams bound_params(const SimConfig& cfg, double cp) {
  BoundParams p;
  p.d = cfg.V;
  p.K = cfg.K;
  p.n = cfg.n;
  p.m = cfg.m;
  p.V = cfg.V;
  p.L = cfg.L;
  p.cp = cp;
  return p;
}

}  // namespace

void SimConfig::validate() const {
  if (V < 2) throw InvalidParameter("V must be >= 2");
  if (K < 1 || K > 65535) throw InvalidParameter("K must be in [1, 65535]");
  if (!(n >= 1.0)) throw InvalidParameter("n must be >= 1 (or inf)");
  if (m < 1) throw InvalidParameter("m must be >= 1");
  if (T < 1 || T0 < 1) throw InvalidParameter("T and T0 must be >= 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidParameter("L must be positive");
  if (!L_list.empty() && L_list.size() != static_cast<std::size_t>(K)) {
    throw InvalidParameter("L_list needs one clip per node");
  }
  for (double c : L_list) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParameter("clips must be positive");
  }
  if (!bits_list.empty() && bits_list.size() != static_cast<std::size_t>(K)) {
    throw InvalidParameter("bits_list needs one entry per node");
  }
  if (bits < 0 || bits > kMaxBitsPerCoord) throw InvalidParameter("bits out of range");
  for (int b : bits_list) {
    if (b < 0 || b > kMaxBitsPerCoord) throw InvalidParameter("bits out of range");
  }
  if (!(truth_scale >= 0.0) || !(truth_margin > 0.0 && truth_margin <= 1.0)) {
    throw InvalidParameter("truth_scale must be >= 0 and truth_margin in (0, 1]");
  }
}

Truth gen_truth(const SimConfig& cfg) {
  cfg.validate();
  Truth truth;
  const double bound = cfg.truth_margin * cfg.L;
  for (int l = 0; l < cfg.m; ++l) {
    const rng::StreamKey key{cfg.truth_seed, rng::Purpose::kTruth, 0, 0,
                             static_cast<std::uint32_t>(l)};
    std::vector<double> row(cfg.V);
    double mean = 0.0;
    for (int v = 0; v < cfg.V; ++v) {
      row[v] = cfg.truth_scale * rng::normal(key, v);
      mean += row[v];
    }
    mean /= cfg.V;
    for (double& x : row) x = std::clamp(x - mean, -bound, bound);
    truth.probs.push_back(softmax(row));
    truth.logits.push_back(std::move(row));
  }
  return truth;
}

std::vector<double> node_observe(std::span<const double> truth, double n, double clip,
                                 std::uint64_t stream_seed, int node, int probe) {
  if (!(n >= 1.0)) throw InvalidParameter("n must be >= 1");
  std::vector<double> out(truth.begin(), truth.end());
  if (std::isfinite(n)) {
    const rng::StreamKey key{stream_seed, rng::Purpose::kNoise, static_cast<std::uint16_t>(node),
                             0, static_cast<std::uint32_t>(probe)};
    const double sd = 1.0 / std::sqrt(n);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += sd * rng::normal(key, v);
  }
  for (double& x : out) x = std::clamp(x, -clip, clip);
  return out;
}

std::uint64_t run_stream_seed(const SimConfig& cfg, std::uint64_t seed) {
  return rng::derive_seed(cfg.experiment_id, seed);
}

double run_fpld(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                std::vector<std::uint8_t>* capture) {
  cfg.validate();
  check_truth(cfg, truth);
  const std::uint64_t stream = run_stream_seed(cfg, seed);
  const std::size_t mV = static_cast<std::size_t>(cfg.m) * cfg.V;

  std::vector<Matrix> obs;
  for (int i = 0; i < cfg.K; ++i) obs.push_back(observe_all(cfg, truth, stream, i, cfg.node_clip(i), 1.0));

  Matrix aggregate(mV, 0.0);
  for (int t = 1; t <= cfg.T; ++t) {
    std::fill(aggregate.begin(), aggregate.end(), 0.0);
    for (int i = 0; i < cfg.K; ++i) {
      const QuantizerSpec spec = make_quantizer(cfg.node_clip(i), cfg.node_bits(i));
      const Matrix recon = transmit(spec, obs[i], cfg.m, cfg.V, i, t, stream, capture);
      for (std::size_t j = 0; j < mV; ++j) aggregate[j] += recon[j];
    }
    for (double& x : aggregate) x /= cfg.K;
  }
  return mean_kl(truth.logits, aggregate, cfg.m, cfg.V);
}

double run_sequential(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                      std::vector<std::uint8_t>* capture) {
  cfg.validate();
  check_truth(cfg, truth);
  const std::uint64_t stream = run_stream_seed(cfg, seed);
  const std::size_t mV = static_cast<std::size_t>(cfg.m) * cfg.V;

  std::vector<Matrix> obs;
  for (int i = 0; i < cfg.K; ++i) obs.push_back(observe_all(cfg, truth, stream, i, cfg.node_clip(i), 1.0));

  // Round t > 1: node i sends its residual against the aggregate broadcast
  // after round t-1; the aggregator adds the averaged residuals.
  Matrix aggregate(mV, 0.0);
  Matrix residual(mV);
  for (int t = 1; t <= cfg.T; ++t) {
    Matrix update(mV, 0.0);
    for (int i = 0; i < cfg.K; ++i) {
      const QuantizerSpec base = make_quantizer(cfg.node_clip(i), cfg.node_bits(i));
      const QuantizerSpec spec =
          cfg.mode == SimMode::kRefine ? refinement_spec(base, t, cfg.gamma) : base;
      for (std::size_t j = 0; j < mV; ++j) residual[j] = obs[i][j] - aggregate[j];
      const Matrix recon = transmit(spec, residual, cfg.m, cfg.V, i, t, stream, capture);
      for (std::size_t j = 0; j < mV; ++j) update[j] += recon[j];
    }
    for (std::size_t j = 0; j < mV; ++j) aggregate[j] += update[j] / cfg.K;
  }
  return mean_kl(truth.logits, aggregate, cfg.m, cfg.V);
}

double run_once(const SimConfig& cfg, const Truth& truth, std::uint64_t seed) {
  return cfg.mode == SimMode::kVanilla ? run_fpld(cfg, truth, seed)
                                       : run_sequential(cfg, truth, seed);
}

std::vector<double> run_seeds(const SimConfig& cfg, const Truth& truth) {
  require_seeds(cfg);
  return parallel_map(cfg.seeds.size(), cfg.jobs,
                      [&](std::size_t s) { return run_once(cfg, truth, cfg.seeds[s]); });
}

std::vector<double> run_seeds_serial(const SimConfig& cfg, const Truth& truth) {
  require_seeds(cfg);
  std::vector<double> out;
  out.reserve(cfg.seeds.size());
  for (std::uint64_t s : cfg.seeds) out.push_back(run_once(cfg, truth, s));
  return out;
}

std::vector<PointSummary> summarize(const std::vector<ResultRow>& rows) {
  std::vector<PointSummary> points;
  std::map<std::tuple<std::string, double, std::string>, std::size_t> where;
  std::vector<std::vector<const ResultRow*>> members;
  for (const ResultRow& r : rows) {
    const auto key = std::make_tuple(r.sweep_name, r.sweep_value, r.policy);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, points.size()).first;
      PointSummary p;
      p.sweep_name = r.sweep_name;
      p.sweep_value = r.sweep_value;
      p.policy = r.policy;
      p.upper_bound = r.upper_bound;
      p.lower_bound = r.lower_bound;
      points.push_back(p);
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& group = members[k];
    const auto count = static_cast<double>(group.size());
    double mean = 0.0;
    double sub = 0.0;
    for (const ResultRow* r : group) {
      mean += r->kl;
      sub += r->suboptimality_ratio;
    }
    mean /= count;
    double ss = 0.0;
    for (const ResultRow* r : group) ss += (r->kl - mean) * (r->kl - mean);
    points[k].count = group.size();
    points[k].mean = mean;
    points[k].stderr_ = group.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
    points[k].suboptimality_mean = sub / count;
  }
  return points;
}

ExperimentResult sweep_fig1(const SimConfig& cfg, const Fig1Sweep& sweep) {
  require_seeds(cfg);
  const Truth truth = gen_truth(cfg);
  ExperimentResult result;
  result.cp = nondegeneracy_cp(truth.probs);

  auto run_point = [&](const std::string& name, double value, int K, int bits) {
    SimConfig point = cfg;
    point.K = K;
    point.bits = bits;
    point.L_list.clear();
    point.bits_list.clear();
    BoundParams p = bound_params(point, result.cp);
    p.B = static_cast<double>(bits) * cfg.V;
    const double upper = upper_bound_homogeneous(p).total;
    const double lower = lower_bound_fpld(p).value;
    const std::vector<double> kls = run_seeds(point, truth);
    for (std::size_t s = 0; s < kls.size(); ++s) {
      result.rows.push_back({cfg.experiment_id, name, value, "fpld", cfg.seeds[s], kls[s],
                             upper, lower});
    }
  };
  for (int K : sweep.K_values) run_point("K", K, K, sweep.K_sweep_bits);
  for (int b : sweep.bits_values) run_point("bits", b, sweep.bits_sweep_K, b);
  result.points = summarize(result.rows);
  return result;
}

ExperimentResult sweep_fig2(const SimConfig& cfg, const Fig2Sweep& sweep) {
  require_seeds(cfg);
  if (cfg.L_list.size() != static_cast<std::size_t>(cfg.K)) {
    throw InvalidParameter("fig2 needs one clip per node (L_list)");
  }
  const Truth truth = gen_truth(cfg);
  ExperimentResult result;
  result.cp = nondegeneracy_cp(truth.probs);

  std::vector<double> w;
  for (double c : cfg.L_list) w.push_back(c * c);
  const double V = cfg.V;

  for (double ratio : sweep.budgets_over_V) {
    const double total = ratio * V;
    const std::vector<std::pair<std::string, AllocationPlan>> plans{
        {"optimal", waterfill_clipped(w, total, V)},
        {"uniform", uniform_allocation(w, total)},
        {"inverse", inverse_weighted_baseline(w, total, V)},
    };
    for (const auto& [policy, plan] : plans) {
      SimConfig point = cfg;
      point.bits_list = integerize(plan, V);
      BoundParams p = bound_params(point, result.cp);
      p.L_list = cfg.L_list;
      for (int b : point.bits_list) p.B_list.push_back(b * V);
      const double upper = upper_bound_heterogeneous(p).total;
      const std::vector<double> kls = run_seeds(point, truth);
      for (std::size_t s = 0; s < kls.size(); ++s) {
        result.rows.push_back({cfg.experiment_id, "Btot_over_V", ratio, policy, cfg.seeds[s],
                               kls[s], upper, std::numeric_limits<double>::quiet_NaN()});
      }
    }
  }
  result.points = summarize(result.rows);
  return result;
}

AdaptiveRun run_adaptive_seed(const SimConfig& cfg, const Truth& truth, std::uint64_t seed,
                              const AdaptiveOptions& opt) {
  cfg.validate();
  check_truth(cfg, truth);
  const std::size_t K = static_cast<std::size_t>(cfg.K);
  const std::size_t mV = static_cast<std::size_t>(cfg.m) * cfg.V;
  const double V = cfg.V;
  const double total = opt.budget_over_V * V;
  const double pilot = opt.budget_over_V / cfg.K;
  if (pilot != std::floor(pilot)) {
    throw InvalidParameter("uniform pilot needs B_tot / (K V) to be an integer");
  }
  const std::uint64_t stream = run_stream_seed(cfg, seed);

  std::vector<double> scale(K);
  std::vector<double> w_true(K);
  for (std::size_t i = 0; i < K; ++i) {
    scale[i] = cfg.node_clip(static_cast<int>(i)) / cfg.L;
    w_true[i] = cfg.node_clip(static_cast<int>(i)) * cfg.node_clip(static_cast<int>(i));
  }
  std::vector<Matrix> obs;
  for (std::size_t i = 0; i < K; ++i) {
    obs.push_back(observe_all(cfg, truth, stream, static_cast<int>(i), cfg.L, scale[i]));
  }

  // Stage A: uniform pilot, aggregator records every reconstruction.
  WarmupRecord rec;
  rec.K = K;
  rec.T0 = static_cast<std::size_t>(cfg.T0);
  rec.m = static_cast<std::size_t>(cfg.m);
  rec.V = static_cast<std::size_t>(cfg.V);
  rec.pilot_bits = static_cast<int>(pilot);
  for (std::size_t i = 0; i < K; ++i) rec.clips.push_back(cfg.node_clip(static_cast<int>(i)));
  rec.values.resize(K * rec.T0 * mV);
  for (int t = 1; t <= cfg.T0; ++t) {
    for (std::size_t i = 0; i < K; ++i) {
      const QuantizerSpec spec = make_quantizer(rec.clips[i], rec.pilot_bits);
      const Matrix recon = transmit(spec, obs[i], cfg.m, cfg.V, static_cast<int>(i), t, stream, nullptr);
      std::copy(recon.begin(), recon.end(),
                rec.values.begin() + static_cast<std::ptrdiff_t>((i * rec.T0 + (t - 1)) * mV));
    }
  }
  const WeightEstimate est = estimate_weights(rec, opt.delta);

  // Stage B: plug-in plan.
  AdaptiveRun run;
  run.w_hat = est.w_hat;
  run.eta_bound = est.eta_bound;
  const AllocationPlan plan =
      opt.oracle ? waterfill_clipped(w_true, total, V) : adaptive_allocate(est, total, V);
  run.bits = integerize(plan, V);
  run.suboptimality_ratio = opt.oracle ? 1.0 : suboptimality_ratio(w_true, est.w_hat, total, V);

  double mean_scale = 0.0;
  for (double s : scale) mean_scale += s;
  mean_scale /= static_cast<double>(K);
  std::vector<std::vector<double>> target = truth.logits;
  for (auto& row : target) {
    for (double& x : row) x *= mean_scale;
  }

  Matrix aggregate(mV, 0.0);
  const int last = std::max(cfg.T, cfg.T0 + 1);
  for (int t = cfg.T0 + 1; t <= last; ++t) {
    std::fill(aggregate.begin(), aggregate.end(), 0.0);
    for (std::size_t i = 0; i < K; ++i) {
      const QuantizerSpec spec = make_quantizer(rec.clips[i], run.bits[i]);
      const Matrix recon = transmit(spec, obs[i], cfg.m, cfg.V, static_cast<int>(i), t, stream, nullptr);
      for (std::size_t j = 0; j < mV; ++j) aggregate[j] += recon[j];
    }
    for (double& x : aggregate) x /= static_cast<double>(K);
  }
  run.kl = mean_kl(target, aggregate, cfg.m, cfg.V);
  return run;
}

ExperimentResult run_adaptive(const SimConfig& cfg, const AdaptiveOptions& opt) {
  require_seeds(cfg);
  if (cfg.L_list.size() != static_cast<std::size_t>(cfg.K)) {
    throw InvalidParameter("adaptive run needs one clip per node (L_list)");
  }
  const Truth truth = gen_truth(cfg);
  ExperimentResult result;
  result.cp = nondegeneracy_cp(truth.probs);

  std::vector<AdaptiveRun> runs(cfg.seeds.size());
  parallel_map(cfg.seeds.size(), cfg.jobs, [&](std::size_t s) {
    runs[s] = run_adaptive_seed(cfg, truth, cfg.seeds[s], opt);
    return runs[s].kl;
  });
  const std::string policy = opt.oracle ? "oracle" : "adaptive";
  for (std::size_t s = 0; s < runs.size(); ++s) {
    BoundParams p = bound_params(cfg, result.cp);
    p.L_list = cfg.L_list;
    for (int b : runs[s].bits) p.B_list.push_back(static_cast<double>(b) * cfg.V);
    ResultRow row{cfg.experiment_id, "T0", static_cast<double>(cfg.T0), policy, cfg.seeds[s],
                  runs[s].kl, upper_bound_heterogeneous(p).total,
                  std::numeric_limits<double>::quiet_NaN()};
    row.suboptimality_ratio = runs[s].suboptimality_ratio;
    result.rows.push_back(row);
  }
  result.points = summarize(result.rows);
  return result;
}

}  // namespace fpld
