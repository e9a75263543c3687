#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedfwd/dataset.hpp"
#include "fedfwd/layers.hpp"
#include "fedfwd/matrix.hpp"
#include "fedfwd/rng.hpp"

namespace fedfwd {

enum class LossKind { kFF, kSymBa };

/// Forward-Forward network: a stack of rectified affine layers with no
/// classifier head. Each layer is trained against its own local objective;
/// prediction compares summed per-layer goodness across candidate labels.
struct FFModel {
  std::vector<AffineLayer> layers;
  double theta = 2.0;  // goodness threshold
  int num_labels = kNumClasses;
};

struct FFHyper {
  double lr = 0.003;
  std::size_t batch_size = 10;
  std::size_t local_epochs = 1;
  LossKind loss_kind = LossKind::kFF;
  double symba_alpha = 1.0;
  double layernorm_eps = 1e-8;
};

FFModel init_ff_model(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                      double theta, int num_labels, RngStream& rng);

/// rectifier(x W^T + b) row-wise; x is batch x in_dim.
Matrix layer_forward(const AffineLayer& layer, const Matrix& x);

/// Per-row sum of squared activities.
std::vector<double> goodness(const Matrix& y);

/// Numerically stable log(1 + e^x) and logistic sigmoid.
double softplus(double x);
double sigmoid(double x);

/// Negative log-probability of a single goodness value being classified
/// correctly: softplus(theta - g) for positive rows, softplus(g - theta)
/// for negative rows.
double ff_loss(double g, double theta, Polarity polarity);

/// Pairwise loss on matched positive/negative goodness:
/// softplus(-alpha * (g_pos - g_neg)) / alpha.
double symba_loss(double g_pos, double g_neg, double alpha);

/// Divide each row by (its Euclidean norm + eps); keeps direction only.
Matrix layer_norm(const Matrix& y, double eps);

struct LayerGrad {
  Matrix dw;
  std::vector<double> db;
  double mean_loss = 0.0;
};

/// Analytic gradient of the mean batch loss with respect to this layer's
/// parameters only. x_pos/x_neg are the layer's own inputs (already
/// normalized when the layer is not first). For kFF the loss is
/// mean(softplus(theta - g_pos)) + mean(softplus(g_neg - theta)); for kSymBa
/// rows are paired and batches must have equal row counts.
LayerGrad layer_grad(const AffineLayer& layer, const Matrix& x_pos, const Matrix& x_neg,
                     double theta, LossKind kind, double symba_alpha);

struct FFTrainResult {
  FFModel model;
  double mean_loss = 0.0;  // mean over batches of the summed per-layer losses
};

/// Greedy layer-wise local training: per epoch, per shuffled mini-batch,
/// embed true labels (positive) and fresh random wrong labels (negative),
/// then update layers first to last, each consuming the already-updated
/// previous layers' normalized outputs. Pure function of (model, data, rng).
FFTrainResult local_train_ff(const FFModel& model, SampleView data, const FFHyper& hyper,
                             RngStream& rng);

/// Total goodness per candidate label (sum over layers, computed on
/// pre-normalization activities). include_first_layer = false drops the
/// first hidden layer's contribution.
std::vector<double> label_scores(const FFModel& model, const LabeledSample& x,
                                 bool include_first_layer = true);

/// Argmax of label_scores, ties broken toward the smallest label.
int predict(const FFModel& model, const LabeledSample& x, bool include_first_layer = true);

/// Batched prediction; identical results to calling predict per sample.
std::vector<int> predict_batch(const FFModel& model, std::span<const LabeledSample> samples,
                               bool include_first_layer = true);

}  // namespace fedfwd
