#pragma once

#include <functional>

#include "fedfwd/matrix.hpp"

namespace fedfwd {

/// Central-difference gradient of a scalar function of a matrix:
/// entry i is (f(x + h e_i) - f(x - h e_i)) / (2h).
///
/// This is the oracle every analytic gradient in the repo is checked
/// against. h must be > 0; a non-finite f evaluation raises NumericError.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& x, double h);

}  // namespace fedfwd
