#include "fedfwd/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedfwd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t key, std::uint64_t element) {
  return mix(key ^ (mix(element + kGolden) + (key << 6) + (key >> 2)));
}

std::uint64_t derive_key(std::uint64_t root_seed, std::span<const std::uint64_t> path) {
  std::uint64_t key = mix(root_seed + kGolden);
  for (std::uint64_t e : path) key = combine(key, e);
  return key;
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed, std::span<const std::uint64_t> path)
    : root_seed_(root_seed),
      path_(path.begin(), path.end()),
      key_(derive_key(root_seed, path)) {}

RngStream::RngStream(std::uint64_t root_seed, std::initializer_list<std::uint64_t> path)
    : RngStream(root_seed, std::span<const std::uint64_t>(path.begin(), path.size())) {}

RngStream RngStream::child(std::uint64_t element) const {
  std::vector<std::uint64_t> p = path_;
  p.push_back(element);
  return RngStream(root_seed_, std::span<const std::uint64_t>(p));
}

std::uint64_t RngStream::next_u64() {
  counter_ += kGolden;
  return mix(key_ + counter_);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be > 0");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double RngStream::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double RngStream::next_gaussian() {
  // Box-Muller; u1 nudged away from zero so log() stays finite.
  double u1 = next_double();
  double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream derive_stream(std::uint64_t root_seed, std::span<const std::uint64_t> path) {
  return RngStream(root_seed, path);
}

}  // namespace fedfwd
