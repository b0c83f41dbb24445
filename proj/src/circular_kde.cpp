#include "cyldens/circular_kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "cyldens/bessel.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"

namespace cyldens {

namespace {

constexpr std::size_t kCdfGridIntervals = 1024;
constexpr double kNuMin = 0.05;
constexpr double kNuMax = 500.0;
constexpr std::size_t kNuGridPoints = 60;
constexpr std::size_t kCosCacheLimit = 4000;

struct LooEvaluator {
  std::span<const double> angles;
  std::vector<float> cos_cache; // upper triangle, only for moderate n

  explicit LooEvaluator(std::span<const double> a) : angles(a) {
    const std::size_t n = angles.size();
    if (n <= kCosCacheLimit) {
      cos_cache.resize(n * (n - 1) / 2);
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          cos_cache[k++] = static_cast<float>(std::cos(angles[i] - angles[j]));
        }
      }
    }
  }

  double operator()(double nu) const {
    const std::size_t n = angles.size();
    std::vector<double> loo_sum(n, 0.0);
    if (!cos_cache.empty()) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double e = std::exp(nu * (static_cast<double>(cos_cache[k++]) - 1.0));
          loo_sum[i] += e;
          loo_sum[j] += e;
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double e = std::exp(nu * (std::cos(angles[i] - angles[j]) - 1.0));
          loo_sum[i] += e;
          loo_sum[j] += e;
        }
      }
    }
    const double log_norm = std::log(kTwoPi) + log_bessel_i0(nu);
    const double offset = nu - log_norm - std::log(static_cast<double>(n - 1));
    double cv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (loo_sum[i] <= 0.0) return -std::numeric_limits<double>::infinity();
      cv += std::log(loo_sum[i]) + offset;
    }
    return cv;
  }
};

} // namespace

struct CircularKde::CdfCache {
  MonotoneCubicCdf cdf;
  std::once_flag built;
};

CircularKde::CircularKde(std::span<const double> angles, double nu)
    : nu_(nu), cache_(std::make_shared<CdfCache>()) {
  if (angles.empty()) {
    throw FitError("CircularKde: empty sample");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("CircularKde: concentration bandwidth must be positive");
  }
  obs_.reserve(angles.size());
  for (double a : angles) obs_.push_back(wrap_angle(a));
  log_norm_ = std::log(kTwoPi) + log_bessel_i0(nu_);
  c0_ = std::exp(-log_norm_);
}

double CircularKde::density(double theta) const {
  double sum = 0.0;
  for (double t : obs_) {
    sum += std::exp(nu_ * std::cos(theta - t) - log_norm_);
  }
  return sum / static_cast<double>(obs_.size());
}

const CircularKde::CdfCache& CircularKde::cache() const {
  std::call_once(cache_->built, [this] {
    const std::size_t n = kCdfGridIntervals;
    const double h = kTwoPi / static_cast<double>(n);
    std::vector<double> samples(2 * n + 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = density(0.5 * h * static_cast<double>(i));
    }
    std::vector<double> cum = cumulative_simpson(samples, h);
    const double total = cum.back();
    std::vector<double> slopes(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      cum[i] /= total;
      slopes[i] = samples[2 * i] / total;
    }
    cum.back() = 1.0; // renormalized so the full turn carries unit mass
    cache_->cdf = MonotoneCubicCdf(0.0, h, std::move(cum), std::move(slopes));
  });
  return *cache_;
}

double CircularKde::cdf(double theta) const {
  if (theta <= 0.0) return 0.0;
  if (theta >= kTwoPi) return 1.0;
  return cache().cdf(theta);
}

double CircularKde::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("CircularKde::quantile: u must lie in [0, 1]");
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return std::nextafter(kTwoPi, 0.0);
  return cache().cdf.inverse(u);
}

double ckde_loo_log_likelihood(std::span<const double> angles, double nu) {
  return LooEvaluator(angles)(nu);
}

double likelihood_cv_concentration(std::span<const double> angles) {
  const LooEvaluator loo(angles);

  std::vector<double> grid(kNuGridPoints);
  const double log_lo = std::log(kNuMin), log_hi = std::log(kNuMax);
  for (std::size_t i = 0; i < kNuGridPoints; ++i) {
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                    static_cast<double>(kNuGridPoints - 1));
  }
  std::size_t best = 0;
  double best_cv = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kNuGridPoints; ++i) {
    const double cv = loo(grid[i]);
    if (cv > best_cv) {
      best_cv = cv;
      best = i;
    }
  }
  if (!std::isfinite(best_cv)) {
    throw FitError("circular bandwidth selection failed: leave-one-out "
                   "likelihood is degenerate; perturb the data first");
  }

  // Golden-section refinement on log nu around the grid optimum.
  double a = std::log(grid[best > 0 ? best - 1 : 0]);
  double b = std::log(grid[std::min(best + 1, kNuGridPoints - 1)]);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = loo(std::exp(x1)), f2 = loo(std::exp(x2));
  for (int it = 0; it < 30 && (b - a) > 1e-4; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = loo(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = loo(std::exp(x1));
    }
  }
  const double refined = std::exp(0.5 * (a + b));
  return (loo(refined) >= best_cv) ? refined : grid[best];
}

CircularKde ckde_fit(std::span<const double> angles, std::optional<double> bandwidth) {
  if (angles.size() < 2) {
    throw FitError("ckde_fit: need at least two observations");
  }
  if (bandwidth) return CircularKde(angles, *bandwidth);

  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  const double rbar = std::hypot(s, c) / static_cast<double>(angles.size());
  bool all_equal = rbar > 1.0 - 1e-12;
  if (all_equal) {
    const double first = wrap_angle(angles.front());
    for (double a : angles) {
      if (wrap_angle(a) != first) {
        all_equal = false;
        break;
      }
    }
  }
  if (all_equal) {
    throw FitError("ckde_fit: all angles identical; perturb the data first "
                   "(see data preparation)");
  }
  return CircularKde(angles, likelihood_cv_concentration(angles));
}

} // namespace cyldens
