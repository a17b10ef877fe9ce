#pragma once

// Bit-exact uplink payloads.
//
// Layout (little-endian):
//   u16 node_id | u16 round | u32 probe_count | u32 vocab | u8 bits_per_coord
//   | f64 clip | u64 dither_seed | body
// The body holds probe_count * vocab indices of bits_per_coord bits each,
// probe-major, MSB-first, zero-padded to a byte boundary at the end only.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fpld::wire {

inline constexpr std::size_t kHeaderSize = 29;

struct PayloadHeader {
  std::uint16_t node_id = 0;
  std::uint16_t round = 0;
  std::uint32_t probe_count = 0;
  std::uint32_t vocab = 0;
  std::uint8_t bits_per_coord = 0;
  double clip = 1.0;
  std::uint64_t dither_seed = 0;

  bool operator==(const PayloadHeader&) const = default;
};

struct Payload {
  PayloadHeader header;
  std::vector<std::uint32_t> indices;  // probe_count * vocab entries

  bool operator==(const Payload&) const = default;
};

/// Body length in bits: probe_count * vocab * bits_per_coord.
std::uint64_t body_bits(const PayloadHeader& header);

/// Throws EncodingError on index overflow or size mismatch.
std::vector<std::uint8_t> pack(const PayloadHeader& header,
                               std::span<const std::uint32_t> indices);

/// Throws ProtocolError on truncation, length mismatch or nonzero padding.
Payload unpack(std::span<const std::uint8_t> bytes);

// Capture files: concatenated payloads, each preceded by a u32 LE length.
void write_capture(const std::filesystem::path& path,
                   std::span<const std::vector<std::uint8_t>> payloads);
void append_capture(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> payload);
std::vector<std::vector<std::uint8_t>> read_capture(const std::filesystem::path& path);

}  // namespace fpld::wire
