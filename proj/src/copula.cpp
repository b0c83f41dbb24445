#include "cyldens/copula.hpp"

#include <cmath>
#include <stdexcept>

#include "cyldens/math_util.hpp"

namespace cyldens {

namespace {

void check_unit(double u, double v) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("copula arguments must lie in [0, 1]");
  }
}

//! Extension of a circular distribution function to the real line by
//! G(t + 2 pi k) = G(t) + k.
double circular_cdf_ext(const CircularModel& m, double t) {
  const double k = std::floor(t / kTwoPi);
  return k + m.cdf(t - kTwoPi * k);
}

} // namespace

void Copula::density_grid(std::span<const double> us, std::span<const double> vs,
                          double* out) const {
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      out[i * vs.size() + j] = density(us[i], vs[j]);
    }
  }
}

double Copula::conditional_inverse(double u, double w) const {
  return conditional_inverse_numeric(*this, u, w);
}

double conditional_inverse_numeric(const Copula& c, double u, double w) {
  check_unit(u, w);
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (c.conditional(u, mid) < w) lo = mid; else hi = mid;
  }
  double v = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double d = c.density(u, v);
    if (!(d > 1e-300)) break;
    double next = v - (c.conditional(u, v) - w) / d;
    if (next < 0.0) next = 0.0;
    if (next > 1.0) next = 1.0;
    v = next;
  }
  return v;
}

// ---------------------------------------------------------------------------

double IndependenceCopula::density(double u, double v) const {
  check_unit(u, v);
  return 1.0;
}

double IndependenceCopula::conditional(double u, double v) const {
  check_unit(u, v);
  return v;
}

double IndependenceCopula::conditional_inverse(double u, double w) const {
  check_unit(u, w);
  return w;
}

// ---------------------------------------------------------------------------

JwLinkCopula::JwLinkCopula(CircularModelPtr joining, JoinSign sign)
    : joining_(std::move(joining)), sign_(sign) {
  if (!joining_) throw std::invalid_argument("JwLinkCopula: null joining density");
  vm_joining_ = dynamic_cast<const VonMises*>(joining_.get());
}

double JwLinkCopula::argument(double u, double v) const {
  return kTwoPi * (sign_ == JoinSign::minus ? u - v : u + v);
}

double JwLinkCopula::density(double u, double v) const {
  check_unit(u, v);
  if (joining_->is_uniform()) return 1.0;
  return kTwoPi * joining_->density(wrap_angle(argument(u, v)));
}

double JwLinkCopula::conditional(double u, double v) const {
  check_unit(u, v);
  if (joining_->is_uniform()) return v;
  if (v >= 1.0) return 1.0;
  if (sign_ == JoinSign::minus) {
    return circular_cdf_ext(*joining_, kTwoPi * u) -
           circular_cdf_ext(*joining_, kTwoPi * (u - v));
  }
  return circular_cdf_ext(*joining_, kTwoPi * (u + v)) -
         circular_cdf_ext(*joining_, kTwoPi * u);
}

double JwLinkCopula::conditional_inverse(double u, double w) const {
  check_unit(u, w);
  if (joining_->is_uniform()) return w;
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  if (vm_joining_ != nullptr) {
    // The conditional is the CDF of a von Mises with recentred mean, so the
    // inverse is its quantile scaled back to the unit interval.
    const double mu = vm_joining_->params().mu;
    const double mean = (sign_ == JoinSign::minus) ? kTwoPi * u - mu
                                                   : mu - kTwoPi * u;
    const VonMises shifted = vm_joining_->with_mean(mean);
    return kInvTwoPi * shifted.quantile(w);
  }
  return conditional_inverse_numeric(*this, u, w);
}

// ---------------------------------------------------------------------------

QsCopula::QsCopula(double alpha) : alpha_(alpha) {
  if (!(std::abs(alpha) <= kInvTwoPi * (1.0 + 1e-12))) {
    throw std::invalid_argument(
        "QsCopula: |alpha| must not exceed 1/(2 pi), the density would go negative");
  }
}

double QsCopula::density(double u, double v) const {
  check_unit(u, v);
  return 1.0 + kTwoPi * alpha_ * std::cos(kTwoPi * u) * (1.0 - 2.0 * v);
}

double QsCopula::conditional(double u, double v) const {
  check_unit(u, v);
  const double a = kTwoPi * alpha_ * std::cos(kTwoPi * u);
  return v + a * v * (1.0 - v);
}

double QsCopula::conditional_inverse(double u, double w) const {
  check_unit(u, w);
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  const double a = kTwoPi * alpha_ * std::cos(kTwoPi * u);
  if (std::abs(a) < 1e-9) return w; // removable singularity of the formula
  const double disc = (a + 1.0) * (a + 1.0) - 4.0 * a * w;
  return (a + 1.0 - std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
}

// ---------------------------------------------------------------------------

FrankCopula::FrankCopula(double alpha) : alpha_(alpha) {
  if (alpha == 0.0 || !std::isfinite(alpha) || std::abs(alpha) > 700.0) {
    throw std::invalid_argument("FrankCopula: alpha must be nonzero and moderate");
  }
}

double FrankCopula::density(double u, double v) const {
  check_unit(u, v);
  const double a = alpha_;
  const double em = -std::expm1(-a); // 1 - e^{-a}
  const double eu = -std::expm1(-a * u);
  const double ev = -std::expm1(-a * v);
  const double denom = em - eu * ev;
  return a * em * std::exp(-a * (u + v)) / (denom * denom);
}

double FrankCopula::conditional(double u, double v) const {
  check_unit(u, v);
  const double a = alpha_;
  const double num = std::exp(-a * u) * std::expm1(-a * v);
  const double denom = std::expm1(-a) + std::expm1(-a * u) * std::expm1(-a * v);
  return num / denom;
}

double FrankCopula::conditional_inverse(double u, double w) const {
  check_unit(u, w);
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  const double a = alpha_;
  const double em = -std::expm1(-a);
  const double eu = std::exp(-a * u);
  return -std::log1p(w * em / (w * (eu - 1.0) - eu)) / a;
}

// ---------------------------------------------------------------------------

ReflectedFrankCopula::ReflectedFrankCopula(double alpha) : frank_(alpha) {}

double ReflectedFrankCopula::density(double u, double v) const {
  check_unit(u, v);
  // Symmetric pair grouping keeps c(0, v) == c(1, v) exact in floating point.
  const double horiz = frank_.density(u, v) + frank_.density(1.0 - u, v);
  const double mirror = frank_.density(u, 1.0 - v) + frank_.density(1.0 - u, 1.0 - v);
  return 0.25 * (horiz + mirror);
}

double ReflectedFrankCopula::conditional(double u, double v) const {
  check_unit(u, v);
  const double direct = frank_.conditional(u, v) + frank_.conditional(1.0 - u, v);
  const double mirrored =
      2.0 - frank_.conditional(u, 1.0 - v) - frank_.conditional(1.0 - u, 1.0 - v);
  return 0.25 * (direct + mirrored);
}

} // namespace cyldens
