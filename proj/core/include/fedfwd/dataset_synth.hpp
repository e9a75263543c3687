#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fedfwd/dataset.hpp"

namespace fedfwd {

/// Knobs for the synthetic digit generator. The generator renders
/// seven-segment digit glyphs with per-sample shift, shear, stroke-thickness
/// and intensity jitter plus additive pixel noise, then quantizes to bytes.
/// It exists so the simulator and its acceptance runs can be exercised
/// end-to-end on machines where the real datasets have not been fetched;
/// files come out in the exact MNIST IDX / CIFAR-10 binary formats.
struct SynthOptions {
  std::size_t train_count = 60000;
  std::size_t test_count = 10000;
  std::uint64_t seed = 7;
  double noise_sigma = 0.12;   // additive gaussian pixel noise
  double max_shift = 3.0;      // uniform glyph shift in pixels, each axis
  double max_shear = 0.15;     // horizontal shear factor range
};

/// Render `count` labeled digit images of side x side pixels (values in
/// [0,1], already byte-quantized so a write/load round trip is lossless).
/// split_tag separates train/test streams under the same seed.
std::vector<LabeledSample> make_synthetic_digits(std::size_t count, std::size_t side,
                                                 std::uint64_t seed,
                                                 std::uint64_t split_tag,
                                                 const SynthOptions& opt);

/// Write train/test IDX files (train-images-idx3-ubyte, train-labels-idx1-ubyte,
/// t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte) under dir.
void write_synthetic_mnist(const std::filesystem::path& dir, const SynthOptions& opt);

/// Write data_batch_1..5.bin and test_batch.bin under dir (32x32x3 records).
void write_synthetic_cifar10(const std::filesystem::path& dir, const SynthOptions& opt);

}  // namespace fedfwd
