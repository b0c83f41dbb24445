#include "cyldens/normal.hpp"

#include <cmath>
#include <stdexcept>

#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"

namespace cyldens {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kInvSqrt2Pi = 1.0 / std::sqrt(kTwoPi);

double std_normal_density(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// Acklam's rational approximation, then Halley refinement against erfc.
double std_normal_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  return x;
}

void check_params(const NormalParams& p) {
  if (!(p.sd > 0.0) || !std::isfinite(p.sd) || !std::isfinite(p.mean)) {
    throw std::domain_error("Normal: sd must be finite and positive");
  }
}

} // namespace

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("normal_quantile: u must lie strictly inside (0, 1)");
  }
  double x = std_normal_quantile_approx(u);
  for (int it = 0; it < 2; ++it) {
    const double e = std_normal_cdf(x) - u;
    const double d = std_normal_density(x);
    if (d <= 0.0) break;
    const double t = e / d;
    x -= t / (1.0 + 0.5 * t * x); // Halley step
  }
  return x;
}

Normal::Normal(NormalParams p) : params_(p) { check_params(p); }

double Normal::density(double x) const {
  const double z = (x - params_.mean) / params_.sd;
  return std_normal_density(z) / params_.sd;
}

double Normal::cdf(double x) const {
  return std_normal_cdf((x - params_.mean) / params_.sd);
}

double Normal::quantile(double u) const {
  return params_.mean + params_.sd * std_normal_quantile(u);
}

double normal_density(double x, const NormalParams& p) {
  return Normal(p).density(x);
}

double normal_cdf(double x, const NormalParams& p) { return Normal(p).cdf(x); }

double normal_quantile(double u, const NormalParams& p) {
  return Normal(p).quantile(u);
}

NormalParams normal_fit_ml(std::span<const double> sample) {
  if (sample.size() < 2) {
    throw FitError("normal_fit_ml: need at least two observations");
  }
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    throw FitError("normal_fit_ml: degenerate sample (zero variance)");
  }
  return NormalParams{mean, sd};
}

} // namespace cyldens
