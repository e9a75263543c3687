#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedfwd/matrix.hpp"
#include "fedfwd/rng.hpp"

namespace fedfwd {

/// One affine layer: weights are out_dim x in_dim, bias has out_dim entries.
/// Shared by the FF network (rectifier applied by the FF forward pass) and
/// the BP baseline (rectifier on hidden layers, none on the head).
struct AffineLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  std::size_t param_count() const { return weights.size() + bias.size(); }
};

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization, weights drawn
/// row-major then bias, all from the given stream.
AffineLayer init_affine_layer(std::size_t in_dim, std::size_t out_dim, RngStream& rng);

std::size_t total_param_count(std::span<const AffineLayer> layers);

bool same_shapes(std::span<const AffineLayer> a, std::span<const AffineLayer> b);

}  // namespace fedfwd
