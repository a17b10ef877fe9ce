#include "fpld/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpld/error.hpp"

namespace fpld {

QuantizerSpec make_quantizer(double clip, int bits_per_coord) {
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw InvalidParameter("quantizer clip must be positive and finite, got " +
                           std::to_string(clip));
  }
  if (bits_per_coord < 0 || bits_per_coord > kMaxBitsPerCoord) {
    throw InvalidParameter("bits_per_coord must be in [0, 32], got " +
                           std::to_string(bits_per_coord));
  }
  // ldexp keeps the step exact for integer bit counts.
  return {clip, bits_per_coord, std::ldexp(2.0 * clip, -bits_per_coord)};
}

namespace {

void check_dither(const QuantizerSpec& spec, double dither) {
  if (!(std::abs(dither) <= 0.5 * spec.step)) {
    throw InvalidDither("dither magnitude exceeds step/2");
  }
}

std::uint32_t encode_unchecked(const QuantizerSpec& spec, double x, double dither) {
  const double y = std::clamp(x, -spec.clip, spec.clip);
  const double cell = std::floor((y + dither + spec.clip) / spec.step);
  const double top = static_cast<double>(spec.cell_count() - 1);
  return static_cast<std::uint32_t>(std::clamp(cell, 0.0, top));
}

double decode_unchecked(const QuantizerSpec& spec, std::uint64_t index, double dither) {
  return -spec.clip + (static_cast<double>(index) + 0.5) * spec.step - dither;
}

}  // namespace

std::uint32_t encode(const QuantizerSpec& spec, double x, double dither) {
  check_dither(spec, dither);
  return encode_unchecked(spec, x, dither);
}

double decode(const QuantizerSpec& spec, std::uint64_t index, double dither) {
  check_dither(spec, dither);
  if (index >= spec.cell_count()) {
    throw ProtocolError("quantizer index " + std::to_string(index) +
                        " out of range for " + std::to_string(spec.bits_per_coord) +
                        " bits");
  }
  return decode_unchecked(spec, index, dither);
}

QuantizedVector quantize_vector(const QuantizerSpec& spec,
                                std::span<const double> values,
                                const DitherStream& stream) {
  QuantizedVector out;
  out.indices.resize(values.size());
  out.reconstruction.resize(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    const double x = values[v];
    if (!std::isfinite(x)) throw InvalidParameter("non-finite logit");
    if (std::abs(x) > spec.clip) ++out.clipped;
    const double u = stream.at(v, spec.step);
    const std::uint32_t index = encode_unchecked(spec, x, u);
    out.indices[v] = index;
    out.reconstruction[v] = decode_unchecked(spec, index, u);
  }
  return out;
}

std::vector<double> dequantize_vector(const QuantizerSpec& spec,
                                      std::span<const std::uint32_t> indices,
                                      const DitherStream& stream) {
  std::vector<double> out(indices.size());
  for (std::size_t v = 0; v < indices.size(); ++v) {
    if (indices[v] >= spec.cell_count()) {
      throw ProtocolError("quantizer index out of range");
    }
    out[v] = decode_unchecked(spec, indices[v], stream.at(v, spec.step));
  }
  return out;
}

double default_refinement_slack(int bits_per_coord) {
  return 1.0 + std::ldexp(1.0, -bits_per_coord);
}

QuantizerSpec refinement_spec(const QuantizerSpec& base, int round, double gamma) {
  if (round < 1) throw InvalidParameter("refinement round must be >= 1");
  if (round == 1) return base;
  if (gamma <= 0.0) gamma = default_refinement_slack(base.bits_per_coord);
  const double clip =
      gamma * std::ldexp(base.clip, -(round - 1) * base.bits_per_coord);
  return make_quantizer(clip, base.bits_per_coord);
}

namespace {

std::vector<std::vector<double>> refine(const QuantizerSpec& base,
                                        std::span<const double> values, int rounds,
                                        const DitherStream& stream, double gamma,
                                        bool rescale) {
  if (rounds < 1) throw InvalidParameter("refinement needs at least one round");
  std::vector<std::vector<double>> history;
  std::vector<double> current(values.size(), 0.0);
  std::vector<double> residual(values.size());
  for (int t = 1; t <= rounds; ++t) {
    const QuantizerSpec spec = rescale ? refinement_spec(base, t, gamma) : base;
    for (std::size_t v = 0; v < values.size(); ++v) residual[v] = values[v] - current[v];
    DitherStream s = stream;
    s.round = static_cast<std::uint16_t>(stream.round + t - 1);
    const QuantizedVector q = quantize_vector(spec, residual, s);
    for (std::size_t v = 0; v < values.size(); ++v) current[v] += q.reconstruction[v];
    history.push_back(current);
  }
  return history;
}

}  // namespace

std::vector<std::vector<double>> refine_sequential(const QuantizerSpec& base,
                                                   std::span<const double> values,
                                                   int rounds,
                                                   const DitherStream& stream,
                                                   double gamma) {
  return refine(base, values, rounds, stream, gamma, true);
}

std::vector<std::vector<double>> refine_fixed_step(const QuantizerSpec& base,
                                                   std::span<const double> values,
                                                   int rounds,
                                                   const DitherStream& stream) {
  return refine(base, values, rounds, stream, 1.0, false);
}

std::vector<double> quantize_batch_serial(const QuantizerSpec& spec,
                                          std::span<const double> rows,
                                          std::size_t dim,
                                          const DitherStream& stream) {
  const std::size_t n = dim == 0 ? 0 : rows.size() / dim;
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < n; ++r) {
    DitherStream s = stream;
    s.probe = static_cast<std::uint32_t>(stream.probe + r);
    const auto q = quantize_vector(spec, rows.subspan(r * dim, dim), s);
    std::copy(q.reconstruction.begin(), q.reconstruction.end(), out.begin() + r * dim);
  }
  return out;
}

std::vector<double> quantize_batch(const QuantizerSpec& spec,
                                   std::span<const double> rows, std::size_t dim,
                                   const DitherStream& stream) {
  const std::ptrdiff_t n = dim == 0 ? 0 : static_cast<std::ptrdiff_t>(rows.size() / dim);
  std::vector<double> out(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    DitherStream s = stream;
    s.probe = static_cast<std::uint32_t>(stream.probe + row);
    const double* in = rows.data() + row * dim;
    double* dst = out.data() + row * dim;
    for (std::size_t v = 0; v < dim; ++v) {
      const double u = s.at(v, spec.step);
      dst[v] = decode_unchecked(spec, encode_unchecked(spec, in[v], u), u);
    }
  }
  return out;
}

}  // namespace fpld
