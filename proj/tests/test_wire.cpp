#include <doctest.h>

#include <filesystem>
#include <vector>

#include "fpld/error.hpp"
#include "fpld/rng.hpp"
#include "fpld/wire.hpp"

using namespace fpld;
using namespace fpld::wire;

namespace {

PayloadHeader header(std::uint32_t m, std::uint32_t V, std::uint8_t bits) {
  PayloadHeader h;
  h.node_id = 3;
  h.round = 2;
  h.probe_count = m;
  h.vocab = V;
  h.bits_per_coord = bits;
  h.clip = 1.5;
  h.dither_seed = 0x0123456789abcdefULL;
  return h;
}

}  // namespace

TEST_CASE("hand-packed examples") {
  const auto bytes = pack(header(1, 8, 1), std::vector<std::uint32_t>{1, 0, 1, 0, 1, 0, 1, 0});
  REQUIRE(bytes.size() == kHeaderSize + 1);
  CHECK(bytes.back() == 0xAA);

  CHECK(pack(header(1, 1, 0), std::vector<std::uint32_t>{0}).size() == kHeaderSize);
  CHECK(pack(header(2, 3, 3), std::vector<std::uint32_t>(6, 7)).size() == kHeaderSize + 3);

  // 3-bit indices 5,3 -> 101 011 00 -> 0xAC.
  const auto two = pack(header(1, 2, 3), std::vector<std::uint32_t>{5, 3});
  CHECK(two.back() == 0xAC);
}

TEST_CASE("header is little-endian at fixed offsets") {
  const auto bytes = pack(header(1, 1, 0), std::vector<std::uint32_t>{0});
  CHECK(bytes[0] == 3);   // node_id
  CHECK(bytes[1] == 0);
  CHECK(bytes[2] == 2);   // round
  CHECK(bytes[4] == 1);   // probe_count
  CHECK(bytes[8] == 1);   // vocab
  CHECK(bytes[12] == 0);  // bits
  CHECK(bytes[21] == 0xef);  // dither seed, low byte first
  CHECK(bytes[28] == 0x01);
}

TEST_CASE("encoding errors") {
  CHECK_THROWS_AS(pack(header(1, 2, 2), std::vector<std::uint32_t>{4, 0}), EncodingError);
  CHECK_THROWS_AS(pack(header(1, 2, 2), std::vector<std::uint32_t>{1}), EncodingError);
  CHECK_THROWS_AS(pack(header(1, 1, 33), std::vector<std::uint32_t>{0}), EncodingError);
}

TEST_CASE("round trip on random payloads") {
  const rng::StreamKey key{77, rng::Purpose::kTest, 0, 0, 0};
  std::uint64_t c = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const auto bits = static_cast<std::uint8_t>(rng::uniform(key, c++) * 33);
    auto h = header(1 + static_cast<std::uint32_t>(rng::uniform(key, c++) * 3),
                    1 + static_cast<std::uint32_t>(rng::uniform(key, c++) * 9), bits);
    h.node_id = static_cast<std::uint16_t>(trial);
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(h.probe_count) * h.vocab);
    for (auto& x : idx) x = static_cast<std::uint32_t>(rng::uniform(key, c++) * std::ldexp(1.0, bits));
    const auto bytes = pack(h, idx);
    REQUIRE(bytes.size() == kHeaderSize + (body_bits(h) + 7) / 8);
    REQUIRE(body_bits(h) == static_cast<std::uint64_t>(idx.size()) * bits);
    const Payload p = unpack(bytes);
    REQUIRE(p.header == h);
    REQUIRE(p.indices == idx);
  }
}

TEST_CASE("a single flipped body bit changes exactly one index") {
  const auto h = header(2, 5, 7);
  std::vector<std::uint32_t> idx{1, 2, 3, 4, 5, 6, 7, 8, 9, 127};
  const auto bytes = pack(h, idx);
  for (std::size_t bit = 0; bit < body_bits(h); ++bit) {
    auto copy = bytes;
    copy[kHeaderSize + bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    const auto p = unpack(copy);
    int changed = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) changed += p.indices[i] != idx[i];
    CHECK(changed == 1);
    CHECK(p.indices[bit / 7] == (idx[bit / 7] ^ (1u << (6 - bit % 7))));
  }
}

TEST_CASE("protocol errors") {
  const auto h = header(1, 3, 3);  // 9 body bits -> 2 bytes, 7 padding bits
  const auto bytes = pack(h, std::vector<std::uint32_t>{1, 2, 3});
  CHECK_THROWS_AS(unpack(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)), ProtocolError);
  CHECK_THROWS_AS(unpack(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 1)), ProtocolError);
  auto longer = bytes;
  longer.push_back(0);
  CHECK_THROWS_AS(unpack(longer), ProtocolError);
  auto padded = bytes;
  padded.back() |= 0x01;
  CHECK_THROWS_AS(unpack(padded), ProtocolError);
  auto badclip = bytes;
  for (int i = 13; i < 21; ++i) badclip[i] = 0;
  CHECK_THROWS_AS(unpack(badclip), ProtocolError);
}

TEST_CASE("bits=9 at V=256 is accepted iff the body length matches") {
  const auto h = header(1, 256, 9);
  std::vector<std::uint32_t> idx(256, 511);
  auto bytes = pack(h, idx);
  CHECK(bytes.size() == kHeaderSize + 288);
  CHECK(unpack(bytes).indices == idx);
  bytes.pop_back();
  CHECK_THROWS_AS(unpack(bytes), ProtocolError);
}

TEST_CASE("capture files") {
  const auto dir = std::filesystem::temp_directory_path() / "fpld_wire_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "capture.bin";
  std::vector<std::vector<std::uint8_t>> payloads{
      pack(header(1, 2, 1), std::vector<std::uint32_t>{1, 0}),
      pack(header(1, 1, 0), std::vector<std::uint32_t>{0}),
  };
  write_capture(path, payloads);
  CHECK(std::filesystem::file_size(path) == payloads[0].size() + payloads[1].size() + 8);
  CHECK(read_capture(path) == payloads);
  std::vector<std::uint8_t> buf;
  append_capture(buf, payloads[0]);
  CHECK(buf.size() == payloads[0].size() + 4);
  CHECK(buf[0] == payloads[0].size());
  std::filesystem::remove_all(dir);
}
