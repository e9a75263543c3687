#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedfwd {

/// Deterministic splittable random stream. A stream is identified purely by
/// (root_seed, stream_path); two streams with the same identity produce
/// bitwise-identical draw sequences on any machine and in any thread
/// schedule, and streams with different paths are statistically independent.
///
/// Derivation hashes the path into a 64-bit key (splitmix-style mixing);
/// draws are counter-based (draw i is a pure function of key and i), so
/// replay never depends on global state. All distributions are hand-rolled
/// on top of next_u64() because the std::<random> distributions are
/// implementation-defined and would break cross-platform replay.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::span<const std::uint64_t> path);
  RngStream(std::uint64_t root_seed, std::initializer_list<std::uint64_t> path);

  /// Fresh stream for path + [element]; independent of this stream's
  /// draw position.
  RngStream child(std::uint64_t element) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();
  /// Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t next_below(std::uint64_t n);
  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi);
  /// Standard normal via Box-Muller (consumes two uniforms per call).
  double next_gaussian();

  /// Fisher-Yates shuffle driven by this stream.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

 private:
  std::uint64_t root_seed_ = 0;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Convenience wrapper matching the module contract.
RngStream derive_stream(std::uint64_t root_seed, std::span<const std::uint64_t> path);

namespace stream_purpose {
// Path tags so that every consumer of randomness draws from its own stream.
inline constexpr std::uint64_t kInit = 1;       // model initialization
inline constexpr std::uint64_t kPartition = 2;  // client data partitioning
inline constexpr std::uint64_t kSampling = 3;   // per-round client sampling
inline constexpr std::uint64_t kTrain = 4;      // per-round per-client local training
inline constexpr std::uint64_t kSynth = 5;      // synthetic dataset generation
}  // namespace stream_purpose

}  // namespace fedfwd
