#include "fedfwd/finite_diff.hpp"

#include <cmath>
#include <stdexcept>

#include "fedfwd/errors.hpp"

namespace fedfwd {

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double orig = probe(r, c);
      probe(r, c) = orig + h;
      const double fplus = f(probe);
      probe(r, c) = orig - h;
      const double fminus = f(probe);
      probe(r, c) = orig;
      if (!std::isfinite(fplus) || !std::isfinite(fminus)) {
        throw NumericError("finite_diff_grad: non-finite function evaluation");
      }
      grad(r, c) = (fplus - fminus) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace fedfwd
