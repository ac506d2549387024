#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poaw {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

std::string to_hex(const Digest& d);
bool parse_hex_digest(std::string_view hex, Digest& out);

std::string bytes_to_hex(std::span<const std::uint8_t> data);
bool hex_to_bytes(std::string_view hex, std::vector<std::uint8_t>& out);

// First 8 bytes interpreted big-endian. Used as the PoW sample space.
std::uint64_t digest_prefix64(const Digest& d);

inline bool digest_less(const Digest& a, const Digest& b) { return a < b; }

// Accumulates length-prefixed fields and hashes them in one shot.
// Length prefixes keep field boundaries unambiguous.
class DigestWriter {
 public:
  DigestWriter& u8(std::uint8_t v);
  DigestWriter& u32(std::uint32_t v);
  DigestWriter& u64(std::uint64_t v);
  DigestWriter& i64(std::int64_t v);
  DigestWriter& bytes(std::span<const std::uint8_t> data);
  DigestWriter& str(std::string_view s);
  DigestWriter& digest(const Digest& d);
  Digest finalize() const;

 private:
  std::vector<std::uint8_t> buf_;
};

}  // namespace poaw
