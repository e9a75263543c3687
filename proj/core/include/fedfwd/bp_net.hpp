#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedfwd/dataset.hpp"
#include "fedfwd/layers.hpp"
#include "fedfwd/matrix.hpp"
#include "fedfwd/rng.hpp"

namespace fedfwd {

/// Backprop baseline: a plain MLP over raw pixels. layers holds the hidden
/// stack followed by a linear classification head (num_labels outputs); the
/// rectifier applies to every layer except the head.
struct BPModel {
  std::vector<AffineLayer> layers;
  int num_labels = kNumClasses;
};

struct BPHyper {
  double lr = 0.003;
  std::size_t batch_size = 10;
  std::size_t local_epochs = 1;
};

/// Hidden layers as given plus the head, all initialized from the same
/// stream in order (so a BP model shares its hidden-layer draws with an FF
/// model built from the same stream state).
BPModel init_bp_model(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                      int num_labels, RngStream& rng);

/// Forward pass to the unnormalized head outputs; x is batch x input_dim.
Matrix bp_logits(const BPModel& model, const Matrix& x);

/// Mean softmax cross-entropy of logits against labels (log-sum-exp form).
double cross_entropy(const Matrix& logits, std::span<const int> labels);

struct BPTrainResult {
  BPModel model;
  double mean_loss = 0.0;  // mean over batches of the batch cross-entropy
};

/// Standard local SGD: per epoch, per shuffled mini-batch, one forward pass,
/// backprop through the whole stack, simultaneous parameter step. Pure
/// function of (model, data, rng).
BPTrainResult local_train_bp(const BPModel& model, SampleView data, const BPHyper& hyper,
                             RngStream& rng);

/// Argmax over head outputs, ties broken toward the smallest label.
int predict_bp(const BPModel& model, const LabeledSample& x);
std::vector<int> predict_batch_bp(const BPModel& model, std::span<const LabeledSample> samples);

}  // namespace fedfwd
