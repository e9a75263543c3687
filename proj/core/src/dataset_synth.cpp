#include "fedfwd/dataset_synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

// Seven-segment glyphs on a unit design box x in [0,1], y in [0,1]
// (y grows downward). Segments: 0 top, 1 top-right, 2 bottom-right,
// 3 bottom, 4 bottom-left, 5 top-left, 6 middle.
struct Segment {
  double x0, y0, x1, y1;
};

constexpr std::array<Segment, 7> kSegments = {{
    {0.15, 0.05, 0.85, 0.05},  // top
    {0.85, 0.05, 0.85, 0.50},  // top-right
    {0.85, 0.50, 0.85, 0.95},  // bottom-right
    {0.15, 0.95, 0.85, 0.95},  // bottom
    {0.15, 0.50, 0.15, 0.95},  // bottom-left
    {0.15, 0.05, 0.15, 0.50},  // top-left
    {0.15, 0.50, 0.85, 0.50},  // middle
}};

constexpr std::array<std::uint8_t, 10> kDigitMask = {
    0b0111111,  // 0: all but middle
    0b0000110,  // 1
    0b1011011,  // 2
    0b1001111,  // 3
    0b1100110,  // 4
    0b1101101,  // 5
    0b1111101,  // 6
    0b0000111,  // 7
    0b1111111,  // 8
    0b1101111,  // 9
};

double point_segment_dist(double px, double py, const Segment& s) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double wx = px - s.x0, wy = py - s.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<LabeledSample> make_synthetic_digits(std::size_t count, std::size_t side,
                                                 std::uint64_t seed,
                                                 std::uint64_t split_tag,
                                                 const SynthOptions& opt) {
  std::vector<LabeledSample> out(count);
  const double box = static_cast<double>(side);
  // Glyph occupies the middle ~60% of the box before jitter.
  const double glyph_w = 0.42 * box, glyph_h = 0.64 * box;
  const double origin_x = 0.29 * box, origin_y = 0.18 * box;

  for (std::size_t i = 0; i < count; ++i) {
    RngStream rng(seed, {stream_purpose::kSynth, split_tag, i});
    const int label = static_cast<int>(rng.next_below(kNumClasses));
    const double dx = rng.next_uniform(-opt.max_shift, opt.max_shift);
    const double dy = rng.next_uniform(-opt.max_shift, opt.max_shift);
    const double shear = rng.next_uniform(-opt.max_shear, opt.max_shear);
    const double thickness = rng.next_uniform(0.050, 0.085) * box;
    const double intensity = rng.next_uniform(0.7, 1.0);
    const std::uint8_t mask = kDigitMask[label];

    LabeledSample& s = out[i];
    s.label = label;
    s.pixels.resize(side * side);
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        // Map pixel into the jittered design box.
        const double gy = (static_cast<double>(y) - origin_y - dy) / glyph_h;
        const double gx =
            (static_cast<double>(x) - origin_x - dx - shear * (static_cast<double>(y) - box / 2)) /
            glyph_w;
        double v = 0.0;
        if (gx > -0.4 && gx < 1.4 && gy > -0.4 && gy < 1.4) {
          double dist = 1e9;
          for (int seg = 0; seg < 7; ++seg) {
            if (mask & (1u << seg)) {
              dist = std::min(dist, point_segment_dist(gx * glyph_w, gy * glyph_h,
                                                       {kSegments[seg].x0 * glyph_w,
                                                        kSegments[seg].y0 * glyph_h,
                                                        kSegments[seg].x1 * glyph_w,
                                                        kSegments[seg].y1 * glyph_h}));
            }
          }
          const double r = dist / thickness;
          v = intensity * std::exp(-r * r);
        }
        v += opt.noise_sigma * rng.next_gaussian();
        // Quantize here so in-memory samples match a write/load round trip.
        s.pixels[y * side + x] = quantize(v) / 255.0;
      }
    }
  }
  return out;
}

namespace {

void write_idx_pair(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path,
                    const std::vector<LabeledSample>& samples, std::size_t side) {
  std::vector<std::uint8_t> images;
  images.reserve(16 + samples.size() * side * side);
  append_be32(images, 0x00000803);
  append_be32(images, static_cast<std::uint32_t>(samples.size()));
  append_be32(images, static_cast<std::uint32_t>(side));
  append_be32(images, static_cast<std::uint32_t>(side));
  for (const auto& s : samples) {
    for (double p : s.pixels) images.push_back(quantize(p));
  }

  std::vector<std::uint8_t> labels;
  labels.reserve(8 + samples.size());
  append_be32(labels, 0x00000801);
  append_be32(labels, static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) labels.push_back(static_cast<std::uint8_t>(s.label));

  write_file(images_path, images);
  write_file(labels_path, labels);
}

}  // namespace

void write_synthetic_mnist(const std::filesystem::path& dir, const SynthOptions& opt) {
  std::filesystem::create_directories(dir);
  const auto train = make_synthetic_digits(opt.train_count, 28, opt.seed, 0, opt);
  const auto test = make_synthetic_digits(opt.test_count, 28, opt.seed, 1, opt);
  write_idx_pair(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", train, 28);
  write_idx_pair(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", test, 28);
}

void write_synthetic_cifar10(const std::filesystem::path& dir, const SynthOptions& opt) {
  std::filesystem::create_directories(dir);
  const auto train = make_synthetic_digits(opt.train_count, 32, opt.seed, 2, opt);
  const auto test = make_synthetic_digits(opt.test_count, 32, opt.seed, 3, opt);

  auto write_records = [](const std::filesystem::path& path,
                          std::span<const LabeledSample> samples, std::uint64_t seed) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(samples.size() * (1 + kCifarDim));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      bytes.push_back(static_cast<std::uint8_t>(s.label));
      // Per-channel tint so the three planes are correlated but not equal.
      RngStream tint(seed, {stream_purpose::kSynth, 9, i});
      for (int ch = 0; ch < 3; ++ch) {
        const double gain = tint.next_uniform(0.75, 1.0);
        for (double p : s.pixels) bytes.push_back(quantize(p * gain));
      }
    }
    write_file(path, bytes);
  };

  const std::size_t per_batch = (train.size() + 4) / 5;
  for (int b = 0; b < 5; ++b) {
    const std::size_t lo = std::min(train.size(), static_cast<std::size_t>(b) * per_batch);
    const std::size_t hi = std::min(train.size(), lo + per_batch);
    write_records(dir / ("data_batch_" + std::to_string(b + 1) + ".bin"),
                  std::span<const LabeledSample>(train.data() + lo, hi - lo), opt.seed + b);
  }
  write_records(dir / "test_batch.bin", test, opt.seed + 17);
}

}  // namespace fedfwd
