#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace ioeq {

// FNV-1a 64-bit. Used for content digests in run manifests; stable across
// platforms and runs, not cryptographic.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Digest of a file's raw bytes, formatted "fnv64:<16 hex digits>".
// Throws std::runtime_error if the file cannot be read.
std::string file_digest(const std::string& path);

}  // namespace ioeq
