#include "cyldens/math_util.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cyldens {

namespace {

double simpson_rule(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(fa, flm, fm, a, m);
  const double right = simpson_rule(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = simpson_rule(fa, fm, fb, a, b);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

std::vector<double> simpson_weights(std::size_t n_intervals, double h) {
  if (n_intervals == 0 || n_intervals % 2 != 0) {
    throw std::invalid_argument("simpson_weights: interval count must be even and > 0");
  }
  std::vector<double> w(n_intervals + 1, 0.0);
  for (std::size_t i = 1; i < n_intervals; ++i) {
    w[i] = (i % 2 == 1) ? 4.0 : 2.0;
  }
  w.front() = 1.0;
  w.back() = 1.0;
  for (auto& x : w) x *= h / 3.0;
  return w;
}

std::vector<double> cumulative_simpson(const std::vector<double>& half_step_values,
                                       double h) {
  if (half_step_values.size() < 3 || half_step_values.size() % 2 == 0) {
    throw std::invalid_argument("cumulative_simpson: need 2k+1 sampled values");
  }
  const std::size_t n = (half_step_values.size() - 1) / 2;
  std::vector<double> cum(n + 1);
  cum[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fa = half_step_values[2 * i];
    const double fm = half_step_values[2 * i + 1];
    const double fb = half_step_values[2 * i + 2];
    cum[i + 1] = cum[i] + h / 6.0 * (fa + 4.0 * fm + fb);
  }
  return cum;
}

MonotoneCubicCdf::MonotoneCubicCdf(double x0, double h, std::vector<double> values,
                                   std::vector<double> slopes)
    : x0_(x0), h_(h), values_(std::move(values)), slopes_(std::move(slopes)) {
  if (values_.size() < 2 || values_.size() != slopes_.size()) {
    throw std::invalid_argument("MonotoneCubicCdf: inconsistent node data");
  }
  // Fritsch–Carlson: a node slope within [0, 3 min(adjacent secants)] keeps
  // every cubic piece nondecreasing.
  const std::size_t n = values_.size() - 1;
  for (std::size_t i = 0; i <= n; ++i) {
    double limit = std::numeric_limits<double>::infinity();
    if (i > 0) limit = std::min(limit, 3.0 * (values_[i] - values_[i - 1]) / h_);
    if (i < n) limit = std::min(limit, 3.0 * (values_[i + 1] - values_[i]) / h_);
    slopes_[i] = std::clamp(slopes_[i], 0.0, std::max(limit, 0.0));
  }
}

double MonotoneCubicCdf::operator()(double x) const {
  const std::size_t n = values_.size() - 1;
  if (x <= x0_) return values_.front();
  if (x >= x0_ + h_ * static_cast<double>(n)) return values_.back();
  const double s = (x - x0_) / h_;
  std::size_t i = static_cast<std::size_t>(s);
  if (i >= n) i = n - 1;
  const double t = s - static_cast<double>(i);
  const double y0 = values_[i], y1 = values_[i + 1];
  const double m0 = slopes_[i] * h_, m1 = slopes_[i + 1] * h_;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 +
         (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
}

double MonotoneCubicCdf::derivative(double x) const {
  const std::size_t n = values_.size() - 1;
  if (x <= x0_) return slopes_.front();
  if (x >= x0_ + h_ * static_cast<double>(n)) return slopes_.back();
  const double s = (x - x0_) / h_;
  std::size_t i = static_cast<std::size_t>(s);
  if (i >= n) i = n - 1;
  const double t = s - static_cast<double>(i);
  const double y0 = values_[i], y1 = values_[i + 1];
  const double m0 = slopes_[i] * h_, m1 = slopes_[i + 1] * h_;
  const double t2 = t * t;
  const double d = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 +
                   (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1;
  return d / h_;
}

double MonotoneCubicCdf::inverse(double y) const {
  const std::size_t n = values_.size() - 1;
  if (y <= values_.front()) return x0_;
  if (y >= values_.back()) return x0_ + h_ * static_cast<double>(n);
  const auto it = std::upper_bound(values_.begin(), values_.end(), y);
  std::size_t i = static_cast<std::size_t>(it - values_.begin()) - 1;
  if (i >= n) i = n - 1;
  double lo = x0_ + h_ * static_cast<double>(i);
  double hi = lo + h_;
  double x = lo + h_ * (y - values_[i]) /
                      std::max(values_[i + 1] - values_[i], 1e-300);
  for (int k = 0; k < 60; ++k) {
    const double fx = (*this)(x)-y;
    if (fx > 0.0) hi = x; else lo = x;
    const double d = derivative(x);
    double next = (d > 1e-300) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

} // namespace cyldens
