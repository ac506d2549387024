#include "poaw/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace poaw {

Digest sha256(std::span<const std::uint8_t> data) {
  thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  thread_local const EVP_MD* md = EVP_sha256();
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestInit_ex(ctx, md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

Digest sha256(std::string_view text) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

static const char* kHexDigits = "0123456789abcdef";

std::string bytes_to_hex(std::span<const std::uint8_t> data) {
  std::string s;
  s.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    s.push_back(kHexDigits[b >> 4]);
    s.push_back(kHexDigits[b & 0xF]);
  }
  return s;
}

std::string to_hex(const Digest& d) { return bytes_to_hex(d); }

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool hex_to_bytes(std::string_view hex, std::vector<std::uint8_t>& out) {
  if (hex.size() % 2 != 0) return false;
  out.clear();
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_val(hex[i]);
    int lo = hex_val(hex[i + 1]);
    if (hi < 0 || lo < 0) return false;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return true;
}

bool parse_hex_digest(std::string_view hex, Digest& out) {
  std::vector<std::uint8_t> bytes;
  if (!hex_to_bytes(hex, bytes) || bytes.size() != out.size()) return false;
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return true;
}

std::uint64_t digest_prefix64(const Digest& d) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

DigestWriter& DigestWriter::u8(std::uint8_t v) {
  buf_.push_back(0x01);
  buf_.push_back(v);
  return *this;
}

DigestWriter& DigestWriter::u32(std::uint32_t v) {
  buf_.push_back(0x04);
  for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

DigestWriter& DigestWriter::u64(std::uint64_t v) {
  buf_.push_back(0x08);
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

DigestWriter& DigestWriter::i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

DigestWriter& DigestWriter::bytes(std::span<const std::uint8_t> data) {
  buf_.push_back(0xFE);
  std::uint64_t n = data.size();
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  buf_.insert(buf_.end(), data.begin(), data.end());
  return *this;
}

DigestWriter& DigestWriter::str(std::string_view s) {
  return bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

DigestWriter& DigestWriter::digest(const Digest& d) {
  buf_.push_back(0x20);
  buf_.insert(buf_.end(), d.begin(), d.end());
  return *this;
}

Digest DigestWriter::finalize() const { return sha256(buf_); }

}  // namespace poaw
