// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace hmor {

/// Shortest decimal that round-trips to the same double.
inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

/// 64-bit FNV-1a, rendered as 16 hex digits. Used for config and mesh hashes.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(double v) { update(shortest(v)); }
  void update_bytes(const void* data, std::size_t size) {
    update(std::string_view(static_cast<const char*>(data), size));
  }

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t s = state_;
    for (int i = 15; i >= 0; --i, s >>= 4) out[i] = digits[s & 0xF];
    return out;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace hmor
