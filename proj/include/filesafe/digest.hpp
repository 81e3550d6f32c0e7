#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>

namespace filesafe {

// 128-bit structural fingerprint.
struct Digest {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;

  std::string hex() const {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
  }
};

// FNV-1a with the 128-bit parameters (offset basis 0x6c62272e07bb014262b5f7c8cd04ed8d,
// prime 2^88 + 2^8 + 0x3b). Variable-length fields are length-prefixed so
// that concatenations cannot alias.
class Hasher {
 public:
  using u128 = unsigned __int128;

  Hasher& bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= kPrime;
    }
    return *this;
  }

  Hasher& u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(buf, 8);
  }

  Hasher& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

  Hasher& tag(std::uint8_t t) { return bytes(&t, 1); }

  Hasher& str(std::string_view s) {
    u64(s.size());
    return bytes(s.data(), s.size());
  }

  Hasher& digest(const Digest& d) {
    u64(d.hi);
    return u64(d.lo);
  }

  Digest finish() const {
    return Digest{static_cast<std::uint64_t>(state_ >> 64), static_cast<std::uint64_t>(state_)};
  }

 private:
  static constexpr u128 kOffset = (u128{0x6c62272e07bb0142ULL} << 64) | u128{0x62b5f7c8cd04ed8dULL};
  static constexpr u128 kPrime = (u128{1} << 88) | u128{0x13b};

  u128 state_ = kOffset;
};

}  // namespace filesafe

template <>
struct std::hash<filesafe::Digest> {
  std::size_t operator()(const filesafe::Digest& d) const noexcept {
    return static_cast<std::size_t>(d.lo ^ (d.hi * 0x9e3779b97f4a7c15ULL));
  }
};
