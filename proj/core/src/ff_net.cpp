#include "fedfwd/ff_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

void add_bias_and_rectify(Matrix& z, std::span<const double> bias) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double* row = z.row(i);
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double v = row[j] + bias[j];
      row[j] = v > 0.0 ? v : 0.0;
    }
  }
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// Scale row i of y by coef[i] * 2 (the goodness chain term d(sum y^2)/dz).
Matrix goodness_backprop(const Matrix& y, std::span<const double> coef) {
  Matrix dz(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double c2 = 2.0 * coef[i];
    const double* yrow = y.row(i);
    double* drow = dz.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) drow[j] = c2 * yrow[j];
  }
  return dz;
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += row[j];
  }
  return sums;
}

}  // namespace

AffineLayer init_affine_layer(std::size_t in_dim, std::size_t out_dim, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  AffineLayer layer;
  layer.weights = Matrix(out_dim, in_dim);
  for (double& w : layer.weights.data()) w = rng.next_uniform(-bound, bound);
  layer.bias.resize(out_dim);
  for (double& b : layer.bias) b = rng.next_uniform(-bound, bound);
  return layer;
}

std::size_t total_param_count(std::span<const AffineLayer> layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

bool same_shapes(std::span<const AffineLayer> a, std::span<const AffineLayer> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].weights.same_shape(b[i].weights) || a[i].bias.size() != b[i].bias.size())
      return false;
  }
  return true;
}

FFModel init_ff_model(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                      double theta, int num_labels, RngStream& rng) {
  if (hidden_widths.empty()) throw std::invalid_argument("init_ff_model: no layers");
  FFModel model;
  model.theta = theta;
  model.num_labels = num_labels;
  std::size_t in_dim = input_dim;
  for (std::size_t w : hidden_widths) {
    model.layers.push_back(init_affine_layer(in_dim, w, rng));
    in_dim = w;
  }
  return model;
}

Matrix layer_forward(const AffineLayer& layer, const Matrix& x) {
  if (x.cols() != layer.in_dim()) {
    throw ShapeError("layer_forward: input cols " + std::to_string(x.cols()) +
                     " != layer in_dim " + std::to_string(layer.in_dim()));
  }
  Matrix z = matmul_nt(x, layer.weights);
  add_bias_and_rectify(z, layer.bias);
  return z;
}

std::vector<double> goodness(const Matrix& y) {
  std::vector<double> g(y.rows(), 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double* row = y.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) acc += row[j] * row[j];
    g[i] = acc;
  }
  return g;
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ff_loss(double g, double theta, Polarity polarity) {
  return polarity == Polarity::kPositive ? softplus(theta - g) : softplus(g - theta);
}

double symba_loss(double g_pos, double g_neg, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("symba_loss: alpha must be > 0");
  return softplus(-alpha * (g_pos - g_neg)) / alpha;
}

Matrix layer_norm(const Matrix& y, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("layer_norm: eps must be > 0");
  Matrix out(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double* row = y.row(i);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) norm2 += row[j] * row[j];
    const double inv = 1.0 / (std::sqrt(norm2) + eps);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) orow[j] = row[j] * inv;
  }
  return out;
}

LayerGrad layer_grad(const AffineLayer& layer, const Matrix& x_pos, const Matrix& x_neg,
                     double theta, LossKind kind, double symba_alpha) {
  if (x_pos.cols() != layer.in_dim() || x_neg.cols() != layer.in_dim()) {
    throw ShapeError("layer_grad: input width does not match layer");
  }
  if (x_pos.rows() == 0 || x_neg.rows() == 0) {
    throw std::invalid_argument("layer_grad: empty batch");
  }
  if (kind == LossKind::kSymBa && x_pos.rows() != x_neg.rows()) {
    throw ShapeError("layer_grad: SymBa needs paired batches of equal size");
  }

  const Matrix y_pos = layer_forward(layer, x_pos);
  const Matrix y_neg = layer_forward(layer, x_neg);
  const std::vector<double> g_pos = goodness(y_pos);
  const std::vector<double> g_neg = goodness(y_neg);

  // coef[i] = dLoss/dg for row i, with the batch-mean weighting folded in;
  // the rectifier gate is handled by goodness_backprop since d(y^2)/dz = 2y
  // vanishes exactly where the unit is off.
  std::vector<double> coef_pos(x_pos.rows()), coef_neg(x_neg.rows());
  double loss = 0.0;
  if (kind == LossKind::kFF) {
    const double inv_pos = 1.0 / static_cast<double>(x_pos.rows());
    const double inv_neg = 1.0 / static_cast<double>(x_neg.rows());
    double loss_pos = 0.0, loss_neg = 0.0;
    for (std::size_t i = 0; i < g_pos.size(); ++i) {
      loss_pos += softplus(theta - g_pos[i]);
      coef_pos[i] = (sigmoid(g_pos[i] - theta) - 1.0) * inv_pos;
    }
    for (std::size_t i = 0; i < g_neg.size(); ++i) {
      loss_neg += softplus(g_neg[i] - theta);
      coef_neg[i] = sigmoid(g_neg[i] - theta) * inv_neg;
    }
    loss = loss_pos * inv_pos + loss_neg * inv_neg;
  } else {
    if (!(symba_alpha > 0.0)) throw std::invalid_argument("layer_grad: alpha must be > 0");
    const double inv = 1.0 / static_cast<double>(x_pos.rows());
    for (std::size_t i = 0; i < g_pos.size(); ++i) {
      const double delta = g_pos[i] - g_neg[i];
      loss += softplus(-symba_alpha * delta) / symba_alpha;
      const double c = sigmoid(-symba_alpha * delta) * inv;
      coef_pos[i] = -c;
      coef_neg[i] = c;
    }
    loss *= inv;
  }

  const Matrix dz_pos = goodness_backprop(y_pos, coef_pos);
  const Matrix dz_neg = goodness_backprop(y_neg, coef_neg);

  LayerGrad grad;
  grad.dw = matmul_tn(dz_pos, x_pos);
  add_into(grad.dw, matmul_tn(dz_neg, x_neg));
  grad.db = column_sums(dz_pos);
  const std::vector<double> db_neg = column_sums(dz_neg);
  for (std::size_t j = 0; j < grad.db.size(); ++j) grad.db[j] += db_neg[j];
  grad.mean_loss = loss;
  return grad;
}

namespace {

void sgd_step(AffineLayer& layer, const LayerGrad& grad, double lr) {
  auto w = layer.weights.data();
  auto dw = grad.dw.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * dw[i];
  for (std::size_t j = 0; j < layer.bias.size(); ++j) layer.bias[j] -= lr * grad.db[j];
}

}  // namespace

FFTrainResult local_train_ff(const FFModel& model, SampleView data, const FFHyper& hyper,
                             RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("local_train_ff: empty client data");
  if (!(hyper.lr >= 0.0)) throw std::invalid_argument("local_train_ff: negative lr");
  if (hyper.batch_size == 0 || hyper.local_epochs == 0) {
    throw std::invalid_argument("local_train_ff: batch_size and local_epochs must be >= 1");
  }

  FFTrainResult result{model, 0.0};
  FFModel& m = result.model;
  const std::size_t n = data.size();
  const std::size_t dim = data[0].pixels.size();
  const int num_labels = m.num_labels;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double loss_total = 0.0;
  std::size_t batch_count = 0;

  for (std::size_t epoch = 0; epoch < hyper.local_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t bsz = std::min(hyper.batch_size, n - start);
      Matrix x_pos(bsz, dim), x_neg(bsz, dim);
      for (std::size_t r = 0; r < bsz; ++r) {
        const LabeledSample& s = data[order[start + r]];
        std::copy(s.pixels.begin(), s.pixels.end(), x_pos.row(r));
        embed_into(x_pos.row_span(r), s.label);
        std::copy(s.pixels.begin(), s.pixels.end(), x_neg.row(r));
        embed_into(x_neg.row_span(r), draw_wrong_label(s.label, num_labels, rng));
      }

      Matrix cur_pos = std::move(x_pos);
      Matrix cur_neg = std::move(x_neg);
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < m.layers.size(); ++k) {
        AffineLayer& layer = m.layers[k];
        const LayerGrad grad =
            layer_grad(layer, cur_pos, cur_neg, m.theta, hyper.loss_kind, hyper.symba_alpha);
        batch_loss += grad.mean_loss;
        sgd_step(layer, grad, hyper.lr);
        if (k + 1 < m.layers.size()) {
          // The next layer consumes the updated layer's normalized output.
          cur_pos = layer_norm(layer_forward(layer, cur_pos), hyper.layernorm_eps);
          cur_neg = layer_norm(layer_forward(layer, cur_neg), hyper.layernorm_eps);
        }
      }
      loss_total += batch_loss;
      ++batch_count;
    }
  }
  result.mean_loss = loss_total / static_cast<double>(batch_count);
  return result;
}

std::vector<double> label_scores(const FFModel& model, const LabeledSample& x,
                                 bool include_first_layer) {
  std::vector<double> scores(model.num_labels, 0.0);
  const double eps = FFHyper{}.layernorm_eps;
  for (int label = 0; label < model.num_labels; ++label) {
    Matrix h(1, x.pixels.size(),
             std::vector<double>(x.pixels.begin(), x.pixels.end()));
    embed_into(h.row_span(0), label);
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
      const Matrix y = layer_forward(model.layers[k], h);
      if (include_first_layer || k > 0) scores[label] += goodness(y)[0];
      if (k + 1 < model.layers.size()) h = layer_norm(y, eps);
    }
  }
  return scores;
}

int predict(const FFModel& model, const LabeledSample& x, bool include_first_layer) {
  const std::vector<double> scores = label_scores(model, x, include_first_layer);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<int> predict_batch(const FFModel& model, std::span<const LabeledSample> samples,
                               bool include_first_layer) {
  const std::size_t n = samples.size();
  std::vector<int> out(n, 0);
  if (n == 0) return out;
  const std::size_t dim = samples[0].pixels.size();
  const double eps = FFHyper{}.layernorm_eps;
  constexpr std::size_t kChunk = 512;

  std::vector<double> scores(n * static_cast<std::size_t>(model.num_labels), 0.0);
  for (std::size_t lo = 0; lo < n; lo += kChunk) {
    const std::size_t bsz = std::min(kChunk, n - lo);
    for (int label = 0; label < model.num_labels; ++label) {
      Matrix h(bsz, dim);
      for (std::size_t r = 0; r < bsz; ++r) {
        const auto& px = samples[lo + r].pixels;
        std::copy(px.begin(), px.end(), h.row(r));
        embed_into(h.row_span(r), label);
      }
      for (std::size_t k = 0; k < model.layers.size(); ++k) {
        const Matrix y = layer_forward(model.layers[k], h);
        if (include_first_layer || k > 0) {
          const std::vector<double> g = goodness(y);
          for (std::size_t r = 0; r < bsz; ++r) {
            scores[(lo + r) * model.num_labels + label] += g[r];
          }
        }
        if (k + 1 < model.layers.size()) h = layer_norm(y, eps);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = scores.data() + i * model.num_labels;
    int best = 0;
    for (int l = 1; l < model.num_labels; ++l) {
      if (row[l] > row[best]) best = l;
    }
    out[i] = best;
  }
  return out;
}

}  // namespace fedfwd
