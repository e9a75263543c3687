#include "fedfwd/dataset.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049
constexpr std::size_t kCifarRecordBytes = 1 + kCifarDim;

std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

// IDX headers are big-endian 32-bit words.
std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > b.size()) {
    throw FormatError(path.string() + ": truncated header");
  }
  return (std::uint32_t(b[offset]) << 24) | (std::uint32_t(b[offset + 1]) << 16) |
         (std::uint32_t(b[offset + 2]) << 8) | std::uint32_t(b[offset + 3]);
}

}  // namespace

std::vector<LabeledSample> load_mnist(const std::filesystem::path& images_path,
                                      const std::filesystem::path& labels_path) {
  const auto images = read_all_bytes(images_path);
  const auto labels = read_all_bytes(labels_path);

  if (read_be32(images, 0, images_path) != kIdxImagesMagic) {
    throw FormatError(images_path.string() + ": bad magic, expected 0x00000803");
  }
  if (read_be32(labels, 0, labels_path) != kIdxLabelsMagic) {
    throw FormatError(labels_path.string() + ": bad magic, expected 0x00000801");
  }

  const std::size_t n_images = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);

  if (n_images != n_labels) {
    throw FormatError("image count " + std::to_string(n_images) +
                      " does not match label count " + std::to_string(n_labels));
  }
  const std::size_t dim = rows * cols;
  if (images.size() != 16 + n_images * dim) {
    throw FormatError(images_path.string() + ": expected " +
                      std::to_string(16 + n_images * dim) + " bytes, got " +
                      std::to_string(images.size()));
  }
  if (labels.size() != 8 + n_labels) {
    throw FormatError(labels_path.string() + ": expected " +
                      std::to_string(8 + n_labels) + " bytes, got " +
                      std::to_string(labels.size()));
  }

  std::vector<LabeledSample> out(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    const std::uint8_t label = labels[8 + i];
    if (label >= kNumClasses) {
      throw FormatError(labels_path.string() + ": label byte " +
                        std::to_string(int(label)) + " out of range");
    }
    out[i].label = label;
    out[i].pixels.resize(dim);
    const std::uint8_t* px = images.data() + 16 + i * dim;
    for (std::size_t p = 0; p < dim; ++p) out[i].pixels[p] = px[p] / 255.0;
  }
  return out;
}

std::vector<LabeledSample> load_cifar10(std::span<const std::filesystem::path> batch_paths) {
  std::vector<LabeledSample> out;
  for (const auto& path : batch_paths) {
    const auto bytes = read_all_bytes(path);
    if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
      throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                        " is not a positive multiple of " +
                        std::to_string(kCifarRecordBytes));
    }
    const std::size_t n = bytes.size() / kCifarRecordBytes;
    out.reserve(out.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* rec = bytes.data() + i * kCifarRecordBytes;
      if (rec[0] >= kNumClasses) {
        throw FormatError(path.string() + ": record " + std::to_string(i) +
                          " label byte " + std::to_string(int(rec[0])) +
                          " out of range");
      }
      LabeledSample s;
      s.label = rec[0];
      s.pixels.resize(kCifarDim);
      for (std::size_t p = 0; p < kCifarDim; ++p) s.pixels[p] = rec[1 + p] / 255.0;
      out.push_back(std::move(s));
    }
  }
  return out;
}

void embed_into(std::span<double> row, int label) {
  for (int c = 0; c < kNumClasses; ++c) row[c] = 0.0;
  row[label] = kEmbedMagnitude;
}

EmbeddedSample embed_label(const LabeledSample& x, int label) {
  if (label < 0 || label >= kNumClasses) {
    throw std::invalid_argument("embed_label: label " + std::to_string(label) +
                                " out of range");
  }
  EmbeddedSample e;
  e.pixels = x.pixels;
  embed_into(e.pixels, label);
  e.embedded_label = label;
  e.polarity = (label == x.label) ? Polarity::kPositive : Polarity::kNegative;
  return e;
}

int draw_wrong_label(int true_label, int num_labels, RngStream& rng) {
  if (num_labels < 2) {
    throw std::invalid_argument("draw_wrong_label: need at least 2 classes");
  }
  // Uniform over the num_labels-1 wrong labels: skip over the true one.
  auto r = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_labels - 1)));
  return r < true_label ? r : r + 1;
}

EmbeddedSample make_negative(const LabeledSample& x, RngStream& rng) {
  return embed_label(x, draw_wrong_label(x.label, kNumClasses, rng));
}

}  // namespace fedfwd
