#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "fedfwd/rng.hpp"

namespace fedfwd {

/// Number of classes; 10 for both supported datasets.
inline constexpr int kNumClasses = 10;

/// Magnitude written into the one-hot label pixels of embedded samples.
/// Equals the maximum pixel value so embedded entries stay on-scale.
inline constexpr double kEmbedMagnitude = 1.0;

inline constexpr std::size_t kMnistDim = 28 * 28;
inline constexpr std::size_t kCifarDim = 32 * 32 * 3;

/// Flattened image scaled to [0,1] with its true class label.
struct LabeledSample {
  std::vector<double> pixels;
  int label = 0;
};

enum class Polarity { kPositive, kNegative };

/// A sample whose leading kNumClasses pixels were overwritten with a one-hot
/// label vector. Positive iff the embedded label is the true label.
struct EmbeddedSample {
  std::vector<double> pixels;
  Polarity polarity = Polarity::kPositive;
  int embedded_label = 0;
};

/// Load an MNIST IDX image/label file pair. Expects magic 2051 (images) and
/// 2049 (labels), big-endian headers. Pixels come out as byte/255.
/// Throws FormatError on bad magic, truncation, or image/label count
/// mismatch; IoError if a file cannot be opened.
std::vector<LabeledSample> load_mnist(const std::filesystem::path& images_path,
                                      const std::filesystem::path& labels_path);

/// Load CIFAR-10 binary batches (3073-byte records: label byte then
/// 32x32x3 pixels, kept channel-major as stored). Throws FormatError when a
/// file size is not a multiple of 3073 or a label byte is >= 10.
std::vector<LabeledSample> load_cifar10(std::span<const std::filesystem::path> batch_paths);

/// Overwrite the leading kNumClasses entries of row with
/// kEmbedMagnitude * one_hot(label). row must already hold the sample pixels.
void embed_into(std::span<double> row, int label);

/// Copy of x with the label one-hot written into the leading pixels.
/// Polarity is positive iff label == x.label.
EmbeddedSample embed_label(const LabeledSample& x, int label);

/// Embed a uniformly random wrong label (never x.label). Requires >= 2 classes.
EmbeddedSample make_negative(const LabeledSample& x, RngStream& rng);

/// Draw a uniformly random label != true_label from [0, num_labels).
int draw_wrong_label(int true_label, int num_labels, RngStream& rng);

/// Non-owning view of selected rows of a dataset, used to hand a client its
/// partition without copying samples.
class SampleView {
 public:
  SampleView() = default;
  SampleView(std::span<const LabeledSample> dataset, std::span<const std::size_t> indices)
      : dataset_(dataset), indices_(indices) {}
  /// View of a whole dataset in order.
  explicit SampleView(std::span<const LabeledSample> dataset) : dataset_(dataset) {}

  std::size_t size() const { return indices_.empty() ? dataset_.size() : indices_.size(); }
  bool empty() const { return size() == 0; }
  const LabeledSample& operator[](std::size_t i) const {
    return indices_.empty() ? dataset_[i] : dataset_[indices_[i]];
  }

 private:
  std::span<const LabeledSample> dataset_;
  std::span<const std::size_t> indices_;
};

}  // namespace fedfwd
