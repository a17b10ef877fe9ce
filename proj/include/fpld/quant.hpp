#pragma once

// Subtractively dithered uniform scalar quantization of clipped logits.

#include <cstdint>
#include <span>
#include <vector>

#include "fpld/rng.hpp"

namespace fpld {

inline constexpr int kMaxBitsPerCoord = 32;

struct QuantizerSpec {
  double clip = 1.0;
  int bits_per_coord = 0;
  double step = 2.0;

  std::uint64_t cell_count() const { return std::uint64_t{1} << bits_per_coord; }
};

/// Throws InvalidParameter unless clip > 0 and 0 <= bits <= kMaxBitsPerCoord.
QuantizerSpec make_quantizer(double clip, int bits_per_coord);

/// Shared public randomness for one (node, round, probe) logit vector.
/// Encoder and decoder both regenerate it; it is never transmitted.
struct DitherStream {
  std::uint64_t seed = 0;
  std::uint16_t node = 0;
  std::uint16_t round = 0;
  std::uint32_t probe = 0;

  rng::StreamKey key() const {
    return {seed, rng::Purpose::kDither, node, round, probe};
  }
  /// Dither for coordinate v, uniform on [-step/2, step/2).
  double at(std::uint64_t v, double step) const {
    return (rng::uniform(key(), v) - 0.5) * step;
  }
};

std::uint32_t encode(const QuantizerSpec& spec, double x, double dither);
double decode(const QuantizerSpec& spec, std::uint64_t index, double dither);

struct QuantizedVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> reconstruction;
  std::size_t clipped = 0;  // coordinates that were outside [-clip, clip]
};

QuantizedVector quantize_vector(const QuantizerSpec& spec,
                                std::span<const double> values,
                                const DitherStream& stream);

/// Decoder side: rebuild a reconstruction from received indices.
std::vector<double> dequantize_vector(const QuantizerSpec& spec,
                                      std::span<const std::uint32_t> indices,
                                      const DitherStream& stream);

/// Default residual slack 1 + 2^-bits.
double default_refinement_slack(int bits_per_coord);

/// Round-t quantizer of the nested/scaled residual scheme (t is 1-based):
/// clip_t = gamma * clip * 2^(-(t-1) * bits), gamma applied for t >= 2 only.
QuantizerSpec refinement_spec(const QuantizerSpec& base, int round, double gamma);

/// Multi-round residual encoding of one vector. Round t quantizes
/// v - reconstruction_{t-1} with refinement_spec(base, t, gamma) and the
/// dither stream of round t. Returns the cumulative reconstruction after
/// each round. gamma <= 0 selects default_refinement_slack.
std::vector<std::vector<double>> refine_sequential(const QuantizerSpec& base,
                                                   std::span<const double> values,
                                                   int rounds,
                                                   const DitherStream& stream,
                                                   double gamma = 0.0);

/// Same schedule but every round reuses the base quantizer (no rescaling).
std::vector<std::vector<double>> refine_fixed_step(const QuantizerSpec& base,
                                                   std::span<const double> values,
                                                   int rounds,
                                                   const DitherStream& stream);

/// Quantizes a batch of vectors (row-major, `dim` columns). Row r uses
/// `stream` with probe = stream.probe + r. The parallel version splits rows
/// across OpenMP threads and is bitwise identical to the serial one.
std::vector<double> quantize_batch(const QuantizerSpec& spec,
                                   std::span<const double> rows, std::size_t dim,
                                   const DitherStream& stream);
std::vector<double> quantize_batch_serial(const QuantizerSpec& spec,
                                          std::span<const double> rows,
                                          std::size_t dim,
                                          const DitherStream& stream);

}  // namespace fpld
