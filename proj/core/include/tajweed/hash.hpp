#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

namespace tajweed {

/// 64-bit FNV-1a, fed incrementally.
class Fnv1a {
 public:
  void bytes(std::span<const unsigned char> data) noexcept {
    for (unsigned char b : data) {
      state_ ^= b;
      state_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) noexcept {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf);
  }
  void f64(double v) noexcept { u64(std::bit_cast<std::uint64_t>(v)); }
  void text(std::string_view s) noexcept {
    u64(s.size());
    bytes({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  }
  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Independent per-item seed from a base seed (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tajweed
