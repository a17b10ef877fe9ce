#include "fpld/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fpld/error.hpp"
#include "fpld/quant.hpp"

namespace fpld::wire {
namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  }
  pos += sizeof(T);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

constexpr std::uint64_t kMaxIndices = std::uint64_t{1} << 32;

std::uint64_t index_count(const PayloadHeader& h) {
  return static_cast<std::uint64_t>(h.probe_count) * h.vocab;
}

}  // namespace

std::uint64_t body_bits(const PayloadHeader& header) {
  return index_count(header) * header.bits_per_coord;
}

std::vector<std::uint8_t> pack(const PayloadHeader& header,
                               std::span<const std::uint32_t> indices) {
  if (header.bits_per_coord > kMaxBitsPerCoord) {
    throw EncodingError("bits_per_coord " + std::to_string(header.bits_per_coord) +
                        " exceeds 32");
  }
  if (indices.size() != index_count(header)) {
    throw EncodingError("index count " + std::to_string(indices.size()) +
                        " does not match probe_count * vocab");
  }
  const unsigned width = header.bits_per_coord;
  const std::uint64_t limit = std::uint64_t{1} << width;

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + (body_bits(header) + 7) / 8);
  put_le(out, header.node_id);
  put_le(out, header.round);
  put_le(out, header.probe_count);
  put_le(out, header.vocab);
  put_le(out, header.bits_per_coord);
  put_le(out, header.clip);
  put_le(out, header.dither_seed);

  std::uint64_t acc = 0;  // pending bits, right-aligned
  unsigned pending = 0;
  for (std::uint32_t index : indices) {
    if (index >= limit) {
      throw EncodingError("index " + std::to_string(index) + " does not fit in " +
                          std::to_string(width) + " bits");
    }
    acc = (acc << width) | index;
    pending += width;
    while (pending >= 8) {
      pending -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> pending));
    }
    acc &= (std::uint64_t{1} << pending) - 1;
  }
  if (pending > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - pending)));
  return out;
}

Payload unpack(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw ProtocolError("payload truncated: " + std::to_string(bytes.size()) +
                        " bytes is shorter than the header");
  }
  Payload p;
  std::size_t pos = 0;
  auto& h = p.header;
  h.node_id = get_le<std::uint16_t>(bytes, pos);
  h.round = get_le<std::uint16_t>(bytes, pos);
  h.probe_count = get_le<std::uint32_t>(bytes, pos);
  h.vocab = get_le<std::uint32_t>(bytes, pos);
  h.bits_per_coord = get_le<std::uint8_t>(bytes, pos);
  h.clip = get_le<double>(bytes, pos);
  h.dither_seed = get_le<std::uint64_t>(bytes, pos);

  if (h.bits_per_coord > kMaxBitsPerCoord) {
    throw ProtocolError("bits_per_coord " + std::to_string(h.bits_per_coord) +
                        " exceeds 32");
  }
  if (!(h.clip > 0.0) || !std::isfinite(h.clip)) {
    throw ProtocolError("header clip must be positive and finite");
  }
  if (index_count(h) > kMaxIndices) {
    throw ProtocolError("payload declares " + std::to_string(index_count(h)) +
                        " indices, more than supported");
  }
  const std::uint64_t nbits = body_bits(h);
  const std::uint64_t expected = (nbits + 7) / 8;
  const std::uint64_t actual = bytes.size() - kHeaderSize;
  if (actual != expected) {
    throw ProtocolError("body is " + std::to_string(actual) + " bytes, header implies " +
                        std::to_string(expected));
  }

  const auto body = bytes.subspan(kHeaderSize);
  const unsigned width = h.bits_per_coord;
  p.indices.resize(index_count(h));
  std::uint64_t acc = 0;
  unsigned available = 0;
  std::size_t next = 0;
  for (auto& index : p.indices) {
    while (available < width) {
      acc = (acc << 8) | body[next++];
      available += 8;
    }
    available -= width;
    index = static_cast<std::uint32_t>((acc >> available) &
                                       ((std::uint64_t{1} << width) - 1));
    acc &= (std::uint64_t{1} << available) - 1;
  }
  // Whatever is left in the accumulator is end padding.
  if (acc != 0) throw ProtocolError("nonzero padding bits");
  return p;
}

void append_capture(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), payload.begin(), payload.end());
}

void write_capture(const std::filesystem::path& path,
                   std::span<const std::vector<std::uint8_t>> payloads) {
  std::vector<std::uint8_t> buffer;
  for (const auto& p : payloads) append_capture(buffer, p);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open capture file " + path.string());
  f.write(reinterpret_cast<const char*>(buffer.data()),
          static_cast<std::streamsize>(buffer.size()));
  if (!f) throw Error("failed writing capture file " + path.string());
}

std::vector<std::vector<std::uint8_t>> read_capture(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open capture file " + path.string());
  const std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(f),
                                       std::istreambuf_iterator<char>()};
  std::vector<std::vector<std::uint8_t>> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 4) throw ProtocolError("truncated capture length prefix");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    if (data.size() - pos < n) throw ProtocolError("truncated capture record");
    out.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

}  // namespace fpld::wire
