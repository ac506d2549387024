#include <doctest.h>

#include <bit>
#include <set>

#include "poaw/digest.hpp"
#include "poaw/rng.hpp"

using namespace poaw;

TEST_CASE("sha256 known vectors") {
  CHECK(to_hex(sha256(std::string_view(""))) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(to_hex(sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("digest determinism and avalanche") {
  DetRng rng(123);
  int trials = 200;
  double total_flipped = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> data(64);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
    Digest d1 = sha256(data);
    CHECK(sha256(data) == d1);

    std::vector<std::uint8_t> mutated = data;
    std::uint64_t bit = rng.below(64 * 8);
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    Digest d2 = sha256(mutated);
    CHECK(d1 != d2);
    int flipped = 0;
    for (int i = 0; i < 32; ++i) flipped += std::popcount(static_cast<unsigned>(d1[i] ^ d2[i]));
    total_flipped += flipped;
  }
  double mean = total_flipped / trials;  // 128 expected of 256 bits
  CHECK(mean > 108.0);
  CHECK(mean < 148.0);
}

TEST_CASE("digest writer separates fields") {
  Digest a = DigestWriter{}.str("ab").str("c").finalize();
  Digest b = DigestWriter{}.str("a").str("bc").finalize();
  Digest c = DigestWriter{}.str("abc").finalize();
  CHECK(a != b);
  CHECK(a != c);
  CHECK(b != c);
}

TEST_CASE("prefix64 is big-endian over the first bytes") {
  Digest d{};
  d[0] = 0x01;
  d[7] = 0xFF;
  CHECK(digest_prefix64(d) == 0x01000000000000FFULL);
}

TEST_CASE("hex round trip") {
  DetRng rng(5);
  std::vector<std::uint8_t> data(47);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
  std::vector<std::uint8_t> back;
  REQUIRE(hex_to_bytes(bytes_to_hex(data), back));
  CHECK(back == data);
  Digest d = sha256(data);
  Digest d2{};
  REQUIRE(parse_hex_digest(to_hex(d), d2));
  CHECK(d2 == d);
  CHECK_FALSE(hex_to_bytes("abq", back));
}

TEST_CASE("deterministic rng") {
  DetRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  DetRng r(7);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t v = r.below(17);
    CHECK(v < 17);
  }

  auto sample = r.sample_without_replacement(50, 12);
  std::set<std::uint64_t> seen(sample.begin(), sample.end());
  CHECK(seen.size() == 12);
  for (std::uint64_t v : sample) CHECK(v < 50);

  auto all = r.sample_without_replacement(8, 8);
  std::set<std::uint64_t> full(all.begin(), all.end());
  CHECK(full.size() == 8);
}
