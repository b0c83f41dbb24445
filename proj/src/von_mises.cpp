#include "cyldens/von_mises.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "cyldens/bessel.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/rng.hpp"

namespace cyldens {

namespace {
constexpr std::size_t kCdfGridIntervals = 512;
constexpr double kKappaMax = 700.0;

void check_params(const VonMisesParams& p) {
  if (!(p.kappa >= 0.0) || !std::isfinite(p.kappa) || !std::isfinite(p.mu)) {
    throw std::domain_error("VonMises: kappa must be finite and nonnegative");
  }
}
} // namespace

struct VonMises::Cache {
  MonotoneCubicCdf cdf; // distribution of vM(0, kappa) on [0, 2pi]
  std::once_flag built;
};

VonMises::VonMises(VonMisesParams p)
    : params_{wrap_angle(p.mu), p.kappa}, cache_(std::make_shared<Cache>()) {
  check_params(p);
  log_norm_ = std::log(kTwoPi) + log_bessel_i0(params_.kappa);
}

VonMises VonMises::with_mean(double mu) const {
  VonMises copy(*this);
  copy.params_.mu = wrap_angle(mu);
  return copy;
}

double VonMises::density(double theta) const {
  return std::exp(params_.kappa * std::cos(theta - params_.mu) - log_norm_);
}

const VonMises::Cache& VonMises::cache() const {
  std::call_once(cache_->built, [this] {
    const std::size_t n = kCdfGridIntervals;
    const double h = kTwoPi / static_cast<double>(n);
    std::vector<double> samples(2 * n + 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double t = 0.5 * h * static_cast<double>(i);
      samples[i] = std::exp(params_.kappa * std::cos(t) - log_norm_);
    }
    std::vector<double> cum = cumulative_simpson(samples, h);
    const double total = cum.back();
    std::vector<double> slopes(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      cum[i] /= total;
      slopes[i] = samples[2 * i] / total;
    }
    cum.back() = 1.0;
    cache_->cdf = MonotoneCubicCdf(0.0, h, std::move(cum), std::move(slopes));
  });
  return *cache_;
}

double VonMises::base_cdf_ext(double t) const {
  const double k = std::floor(t / kTwoPi);
  const double r = t - kTwoPi * k;
  return k + cache().cdf(r);
}

double VonMises::base_quantile(double y) const {
  const double k = std::floor(y);
  const double r = y - k;
  return kTwoPi * k + cache().cdf.inverse(r);
}

double VonMises::cdf(double theta) const {
  if (theta <= 0.0) return 0.0;
  if (theta >= kTwoPi) return 1.0;
  if (is_uniform()) return theta * kInvTwoPi;
  return base_cdf_ext(theta - params_.mu) - base_cdf_ext(-params_.mu);
}

double VonMises::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("VonMises::quantile: u must lie in [0, 1]");
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return std::nextafter(kTwoPi, 0.0);
  if (is_uniform()) return kTwoPi * u;
  const double y = u + base_cdf_ext(-params_.mu);
  return wrap_angle(params_.mu + base_quantile(y));
}

double VonMises::cdf_exact(double theta) const {
  if (theta <= 0.0) return 0.0;
  if (theta >= kTwoPi) return 1.0;
  if (is_uniform()) return theta * kInvTwoPi;
  return adaptive_simpson([this](double t) { return density(t); }, 0.0, theta, 1e-10);
}

double vm_density(double theta, const VonMisesParams& p) {
  check_params(p);
  const double log_norm = std::log(kTwoPi) + log_bessel_i0(p.kappa);
  return std::exp(p.kappa * std::cos(theta - p.mu) - log_norm);
}

double vm_cdf(double theta, const VonMisesParams& p) {
  return VonMises(p).cdf_exact(theta);
}

double vm_quantile(double u, const VonMisesParams& p) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("vm_quantile: u must lie in [0, 1]");
  }
  const VonMises model(p);
  double theta = model.quantile(u);
  if (model.is_uniform() || u == 0.0 || u == 1.0) return theta;
  // Polish against the quadrature CDF so the round trip holds to 1e-9.
  for (int it = 0; it < 4; ++it) {
    const double f = model.cdf_exact(theta) - u;
    const double d = model.density(theta);
    if (d <= 0.0) break;
    const double step = f / d;
    theta -= step;
    if (theta < 0.0) theta = 0.0;
    if (theta >= kTwoPi) theta = std::nextafter(kTwoPi, 0.0);
    if (std::abs(step) < 1e-13) break;
  }
  return theta;
}

VonMisesParams vm_fit_ml(std::span<const double> angles) {
  if (angles.size() < 2) {
    throw FitError("vm_fit_ml: need at least two observations");
  }
  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  const double n = static_cast<double>(angles.size());
  const double rbar = std::hypot(s, c) / n;
  if (rbar > 1.0 - 1e-9) {
    throw FitError("vm_fit_ml: degenerate sample (mean resultant length ~ 1, "
                   "kappa diverges)");
  }
  VonMisesParams p;
  p.mu = (rbar < 1e-12) ? 0.0 : wrap_angle(std::atan2(s, c));
  if (rbar < 1e-12) {
    p.kappa = 0.0;
    return p;
  }

  // Fisher's approximation as the Newton starting point.
  double kappa;
  if (rbar < 0.53) {
    kappa = 2.0 * rbar + rbar * rbar * rbar + 5.0 * std::pow(rbar, 5) / 6.0;
  } else if (rbar < 0.85) {
    kappa = -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar);
  } else {
    kappa = 1.0 / (std::pow(rbar, 3) - 4.0 * rbar * rbar + 3.0 * rbar);
  }
  double lo = 1e-8, hi = kKappaMax;
  kappa = std::min(std::max(kappa, lo), hi);
  for (int it = 0; it < 100; ++it) {
    const double a = bessel_i1_over_i0(kappa);
    const double f = a - rbar;
    if (f > 0.0) hi = kappa; else lo = kappa;
    const double da = 1.0 - a * a - a / kappa;
    double next = (da > 0.0) ? kappa - f / da : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - kappa) < 1e-12 * (1.0 + kappa)) {
      kappa = next;
      break;
    }
    kappa = next;
  }
  p.kappa = kappa;
  return p;
}

VonMisesParams vm_fit_ml_bias_corrected(std::span<const double> angles) {
  VonMisesParams p = vm_fit_ml(angles);
  const double n = static_cast<double>(angles.size());
  if (p.kappa < 2.0) {
    p.kappa = std::max(p.kappa - 2.0 / (n * p.kappa), 0.0);
  } else {
    p.kappa *= (n - 1.0) * (n - 1.0) * (n - 1.0) / (n * n * n + n);
  }
  return p;
}

std::vector<double> vm_sample(std::size_t n, const VonMisesParams& p, Rng& rng) {
  check_params(p);
  std::vector<double> out;
  out.reserve(n);
  if (p.kappa < 1e-12) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(kTwoPi * rng.uniform01());
    return out;
  }
  // Best–Fisher (1979) rejection sampler.
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * p.kappa * p.kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * p.kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  for (std::size_t i = 0; i < n; ++i) {
    double f;
    for (;;) {
      const double z = std::cos(kPi * rng.uniform01());
      f = (1.0 + r * z) / (r + z);
      const double c = p.kappa * (r - f);
      const double u2 = rng.uniform01();
      if (c * (2.0 - c) - u2 > 0.0) break;
      if (std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double sign = (rng.uniform01() < 0.5) ? -1.0 : 1.0;
    out.push_back(wrap_angle(p.mu + sign * std::acos(f)));
  }
  return out;
}

std::vector<double> vm_sample(std::size_t n, const VonMisesParams& p,
                              std::uint64_t seed) {
  Rng rng(seed);
  return vm_sample(n, p, rng);
}

} // namespace cyldens
