#include "fedfwd/bp_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedfwd/errors.hpp"
#include "fedfwd/ff_net.hpp"

namespace fedfwd {

BPModel init_bp_model(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                      int num_labels, RngStream& rng) {
  if (hidden_widths.empty()) throw std::invalid_argument("init_bp_model: no hidden layers");
  if (num_labels < 2) throw std::invalid_argument("init_bp_model: need >= 2 labels");
  BPModel model;
  model.num_labels = num_labels;
  std::size_t in_dim = input_dim;
  for (std::size_t w : hidden_widths) {
    model.layers.push_back(init_affine_layer(in_dim, w, rng));
    in_dim = w;
  }
  model.layers.push_back(init_affine_layer(in_dim, static_cast<std::size_t>(num_labels), rng));
  return model;
}

namespace {

Matrix affine(const AffineLayer& layer, const Matrix& x) {
  Matrix z = matmul_nt(x, layer.weights);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double* row = z.row(i);
    for (std::size_t j = 0; j < z.cols(); ++j) row[j] += layer.bias[j];
  }
  return z;
}

void rectify(Matrix& z) {
  for (double& v : z.data())
    if (v < 0.0) v = 0.0;
}

}  // namespace

Matrix bp_logits(const BPModel& model, const Matrix& x) {
  if (model.layers.empty()) throw std::invalid_argument("bp_logits: empty model");
  Matrix h = affine(model.layers[0], x);
  for (std::size_t k = 1; k < model.layers.size(); ++k) {
    rectify(h);
    h = affine(model.layers[k], h);
  }
  return h;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows() != labels.size()) {
    throw ShapeError("cross_entropy: one label per logits row required");
  }
  if (logits.rows() == 0) throw std::invalid_argument("cross_entropy: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.row(i);
    const double zmax = *std::max_element(row, row + logits.cols());
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) sum += std::exp(row[j] - zmax);
    const double lse = zmax + std::log(sum);
    total += lse - row[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(logits.rows());
}

BPTrainResult local_train_bp(const BPModel& model, SampleView data, const BPHyper& hyper,
                             RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("local_train_bp: empty client data");
  if (!(hyper.lr >= 0.0)) throw std::invalid_argument("local_train_bp: negative lr");
  if (hyper.batch_size == 0 || hyper.local_epochs == 0) {
    throw std::invalid_argument("local_train_bp: batch_size and local_epochs must be >= 1");
  }

  BPTrainResult result{model, 0.0};
  BPModel& m = result.model;
  const std::size_t n = data.size();
  const std::size_t dim = data[0].pixels.size();
  const std::size_t depth = m.layers.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double loss_total = 0.0;
  std::size_t batch_count = 0;

  for (std::size_t epoch = 0; epoch < hyper.local_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t bsz = std::min(hyper.batch_size, n - start);
      Matrix x(bsz, dim);
      std::vector<int> labels(bsz);
      for (std::size_t r = 0; r < bsz; ++r) {
        const LabeledSample& s = data[order[start + r]];
        std::copy(s.pixels.begin(), s.pixels.end(), x.row(r));
        labels[r] = s.label;
      }

      // acts[k] is layer k's input; acts[depth] holds the logits.
      std::vector<Matrix> acts;
      acts.reserve(depth + 1);
      acts.push_back(std::move(x));
      for (std::size_t k = 0; k < depth; ++k) {
        Matrix z = affine(m.layers[k], acts.back());
        if (k + 1 < depth) rectify(z);
        acts.push_back(std::move(z));
      }

      const Matrix& logits = acts.back();
      loss_total += cross_entropy(logits, labels);
      ++batch_count;

      // dz = (softmax - one_hot) / batch for the mean loss.
      Matrix dz(bsz, logits.cols());
      const double inv_b = 1.0 / static_cast<double>(bsz);
      for (std::size_t i = 0; i < bsz; ++i) {
        const double* row = logits.row(i);
        double* drow = dz.row(i);
        const double zmax = *std::max_element(row, row + logits.cols());
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
          drow[j] = std::exp(row[j] - zmax);
          sum += drow[j];
        }
        const double inv_sum = 1.0 / sum;
        for (std::size_t j = 0; j < logits.cols(); ++j) drow[j] *= inv_sum * inv_b;
        drow[static_cast<std::size_t>(labels[i])] -= inv_b;
      }

      // Walk back through the stack; grads are applied immediately after the
      // layer's upstream signal has been produced, so updates never feed
      // into the same batch's gradient.
      for (std::size_t k = depth; k-- > 0;) {
        AffineLayer& layer = m.layers[k];
        const Matrix dw = matmul_tn(dz, acts[k]);
        std::vector<double> db(layer.bias.size(), 0.0);
        for (std::size_t i = 0; i < dz.rows(); ++i) {
          const double* drow = dz.row(i);
          for (std::size_t j = 0; j < dz.cols(); ++j) db[j] += drow[j];
        }
        if (k > 0) {
          Matrix dx = matmul(dz, layer.weights);
          const Matrix& a = acts[k];  // post-rectifier input to this layer
          auto dxd = dx.data();
          auto ad = a.data();
          for (std::size_t i = 0; i < dxd.size(); ++i) {
            if (ad[i] <= 0.0) dxd[i] = 0.0;
          }
          dz = std::move(dx);
        }
        auto w = layer.weights.data();
        auto dwd = dw.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= hyper.lr * dwd[i];
        for (std::size_t j = 0; j < layer.bias.size(); ++j) layer.bias[j] -= hyper.lr * db[j];
      }
    }
  }
  result.mean_loss = loss_total / static_cast<double>(batch_count);
  return result;
}

int predict_bp(const BPModel& model, const LabeledSample& x) {
  Matrix in = Matrix::row_vector(x.pixels);
  const Matrix logits = bp_logits(model, in);
  const double* row = logits.row(0);
  int best = 0;
  for (std::size_t j = 1; j < logits.cols(); ++j) {
    if (row[j] > row[best]) best = static_cast<int>(j);
  }
  return best;
}

std::vector<int> predict_batch_bp(const BPModel& model, std::span<const LabeledSample> samples) {
  const std::size_t n = samples.size();
  std::vector<int> out(n, 0);
  if (n == 0) return out;
  const std::size_t dim = samples[0].pixels.size();
  constexpr std::size_t kChunk = 512;
  for (std::size_t lo = 0; lo < n; lo += kChunk) {
    const std::size_t bsz = std::min(kChunk, n - lo);
    Matrix x(bsz, dim);
    for (std::size_t r = 0; r < bsz; ++r) {
      const auto& px = samples[lo + r].pixels;
      std::copy(px.begin(), px.end(), x.row(r));
    }
    const Matrix logits = bp_logits(model, x);
    for (std::size_t r = 0; r < bsz; ++r) {
      const double* row = logits.row(r);
      int best = 0;
      for (std::size_t j = 1; j < logits.cols(); ++j) {
        if (row[j] > row[best]) best = static_cast<int>(j);
      }
      out[lo + r] = best;
    }
  }
  return out;
}

}  // namespace fedfwd
