#include "cyldens/boxcox.hpp"

#include <cmath>
#include <stdexcept>

namespace cyldens {

double boxcox(double x, const BoxCoxParams& p) {
  if (!(x > 0.0)) {
    throw std::domain_error("boxcox: argument must be positive");
  }
  if (p.lambda == 0.0) return std::log(x);
  return std::expm1(p.lambda * std::log(x)) / p.lambda;
}

double boxcox_inverse(double y, const BoxCoxParams& p) {
  if (p.lambda == 0.0) return std::exp(y);
  const double base = 1.0 + p.lambda * y;
  if (!(base > 0.0)) {
    throw std::domain_error("boxcox_inverse: value outside the transform range");
  }
  return std::exp(std::log1p(p.lambda * y) / p.lambda);
}

} // namespace cyldens
