#include "cyldens/bessel.hpp"

#include <cmath>
#include <stdexcept>

#include "cyldens/math_util.hpp"

namespace cyldens {

namespace {

constexpr double kSeriesCutoff = 15.0;

void check_arg(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error("bessel_i0: argument must be finite and nonnegative");
  }
}

// Sum_k ((x/2)^2k / (k!)^2), converges fast for x < 15.
double i0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Correction series of the large-argument expansion:
// I0(x) ~ e^x / sqrt(2 pi x) * sum_k t_k, t_0 = 1, t_k = t_{k-1} (2k-1)^2 / (8 k x).
double i0_asymptotic_correction(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (8.0 * k * x);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double i1_series(double x) {
  const double q = 0.25 * x * x;
  double term = 0.5 * x;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + 1));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// I1(x) ~ e^x / sqrt(2 pi x) * sum_k t_k with
// t_0 = 1, t_k = t_{k-1} (4 - (2k-1)^2) / (8 k x).
double i1_asymptotic_correction(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (4.0 - odd * odd) / (8.0 * k * x);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

} // namespace

double bessel_i0(double x) {
  check_arg(x);
  if (x < kSeriesCutoff) return i0_series(x);
  return std::exp(x) / std::sqrt(kTwoPi * x) * i0_asymptotic_correction(x);
}

double log_bessel_i0(double x) {
  check_arg(x);
  if (x < kSeriesCutoff) return std::log(i0_series(x));
  return x - 0.5 * std::log(kTwoPi * x) + std::log(i0_asymptotic_correction(x));
}

double bessel_i1(double x) {
  check_arg(x);
  if (x < kSeriesCutoff) return i1_series(x);
  return std::exp(x) / std::sqrt(kTwoPi * x) * i1_asymptotic_correction(x);
}

double bessel_i1_over_i0(double x) {
  check_arg(x);
  if (x < kSeriesCutoff) return i1_series(x) / i0_series(x);
  return i1_asymptotic_correction(x) / i0_asymptotic_correction(x);
}

} // namespace cyldens
