#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ehrcheck::util {

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

// Stable 64-bit FNV-1a; used for feature hashing in the mock encoders.
constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ehrcheck::util
