#pragma once

namespace cyldens {

//! Box–Cox power parameter; lambda = 0 is the logarithm case.
struct BoxCoxParams {
  double lambda = 0.0;
};

//! (x^lambda - 1) / lambda, or log x for lambda = 0.
//! Throws std::domain_error for x <= 0.
double boxcox(double x, const BoxCoxParams& p);

//! Inverse transform; throws std::domain_error when the argument lies outside
//! the transform's range (1 + lambda * y must be positive).
double boxcox_inverse(double y, const BoxCoxParams& p);

} // namespace cyldens
