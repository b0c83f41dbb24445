#include "cyldens/linear_kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/normal.hpp"

namespace cyldens {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(kTwoPi);

double sample_sd(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

double robust_scale(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double iqr = sample_quantile(s, 0.75) - sample_quantile(s, 0.25);
  const double sd = sample_sd(x);
  double scale = std::min(sd, iqr / 1.349);
  if (scale <= 0.0) scale = std::max(sd, iqr / 1.349);
  return scale;
}

// Pairwise-difference bin counts shared by the psi-functional evaluations,
// following the classical binned implementation of the SJ selector.
struct PairBins {
  double width = 0.0;
  std::vector<double> counts;
};

PairBins bin_pair_distances(std::span<const double> x, std::size_t nbins) {
  PairBins bins;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double range = *mx - *mn;
  bins.width = range / static_cast<double>(nbins - 1);
  bins.counts.assign(nbins, 0.0);
  if (bins.width <= 0.0) return bins;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = std::abs(x[i] - x[j]);
      auto b = static_cast<std::size_t>(d / bins.width + 0.5);
      if (b >= nbins) b = nbins - 1;
      bins.counts[b] += 1.0;
    }
  }
  return bins;
}

// psi_4 estimate: sum of the fourth Gaussian-derivative kernel over all pairs.
double psi4(const PairBins& bins, std::size_t n, double g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < bins.counts.size(); ++i) {
    if (bins.counts[i] == 0.0) continue;
    const double t = bins.width * static_cast<double>(i) / g;
    const double q = t * t;
    if (q > 100.0) break;
    sum += bins.counts[i] * std::exp(-0.5 * q) * (q * q - 6.0 * q + 3.0);
  }
  sum = 2.0 * sum + static_cast<double>(n) * 3.0;
  const double nn = static_cast<double>(n);
  return sum / (nn * (nn - 1.0) * std::pow(g, 5.0) * std::sqrt(kTwoPi));
}

double psi6(const PairBins& bins, std::size_t n, double g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < bins.counts.size(); ++i) {
    if (bins.counts[i] == 0.0) continue;
    const double t = bins.width * static_cast<double>(i) / g;
    const double q = t * t;
    if (q > 100.0) break;
    sum += bins.counts[i] * std::exp(-0.5 * q) *
           (q * q * q - 15.0 * q * q + 45.0 * q - 15.0);
  }
  sum = 2.0 * sum + static_cast<double>(n) * (-15.0);
  const double nn = static_cast<double>(n);
  return sum / (nn * (nn - 1.0) * std::pow(g, 7.0) * std::sqrt(kTwoPi));
}

void check_sample(std::span<const double> sample) {
  if (sample.size() < 2) {
    throw FitError("lkde_fit: need at least two observations");
  }
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  if (!(*mx > *mn)) {
    throw FitError("lkde_fit: degenerate sample (no spread); perturb the data "
                   "first (see data preparation)");
  }
}

} // namespace

double sample_quantile(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("sample_quantile: empty sample");
  if (n == 1) return sorted[0];
  const double idx = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(idx);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double silverman_bandwidth(std::span<const double> sample) {
  const double n = static_cast<double>(sample.size());
  return 0.9 * robust_scale(sample) * std::pow(n, -0.2);
}

std::pair<double, bool> sheather_jones_bandwidth(std::span<const double> sample) {
  const std::size_t n = sample.size();
  const double nn = static_cast<double>(n);
  const double scale = robust_scale(sample);
  const PairBins bins = bin_pair_distances(sample, 1000);
  if (bins.width <= 0.0) {
    throw FitError("sheather_jones_bandwidth: degenerate sample; perturb the "
                   "data first (see data preparation)");
  }

  const double a = 1.24 * scale * std::pow(nn, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(nn, -1.0 / 9.0);
  const double td = -psi6(bins, n, b);
  if (!std::isfinite(td) || td <= 0.0) {
    return {silverman_bandwidth(sample), true};
  }
  const double alpha2 = 1.357 * std::pow(psi4(bins, n, a) / td, 1.0 / 7.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(kPi) * nn);
  const auto fixed_point = [&](double h) {
    const double sd = psi4(bins, n, alpha2 * std::pow(h, 5.0 / 7.0));
    if (!(sd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(c1 / sd, 0.2) - h;
  };

  const double hmax = 1.144 * scale * std::pow(nn, -0.2);
  double lo = 0.1 * hmax, hi = hmax;
  double flo = fixed_point(lo), fhi = fixed_point(hi);
  for (int attempt = 0; attempt < 10 && (!std::isfinite(flo) || !std::isfinite(fhi) ||
                                         flo * fhi > 0.0);
       ++attempt) {
    lo *= 0.5;
    hi *= 1.5;
    flo = fixed_point(lo);
    fhi = fixed_point(hi);
  }
  if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0.0) {
    return {silverman_bandwidth(sample), true};
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fixed_point(mid);
    if (!std::isfinite(fm)) break;
    if (fm * flo <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo < 1e-7 * hmax) break;
  }
  return {0.5 * (lo + hi), false};
}

LinearKde::LinearKde(std::span<const double> sample, double bandwidth,
                     BandwidthMethod method)
    : obs_(sample.begin(), sample.end()), h_(bandwidth), method_(method) {
  if (obs_.empty()) {
    throw FitError("LinearKde: empty sample");
  }
  if (!(h_ > 0.0) || !std::isfinite(h_)) {
    throw std::domain_error("LinearKde: bandwidth must be positive");
  }
  obs_sd_ = obs_.size() > 1 ? sample_sd(obs_) : 0.0;
}

LinearKde lkde_fit(std::span<const double> sample, std::optional<double> bandwidth) {
  if (bandwidth) {
    if (sample.empty()) throw FitError("lkde_fit: empty sample");
    return LinearKde(sample, *bandwidth, BandwidthMethod::explicit_value);
  }
  check_sample(sample);
  const auto [h, fallback] = sheather_jones_bandwidth(sample);
  return LinearKde(sample, h,
                   fallback ? BandwidthMethod::silverman_fallback
                            : BandwidthMethod::sheather_jones);
}

double LinearKde::density(double x) const {
  double sum = 0.0;
  for (double xi : obs_) {
    const double t = (x - xi) / h_;
    const double q = t * t;
    if (q < 160.0) sum += std::exp(-0.5 * q);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(obs_.size()) * h_);
}

double LinearKde::cdf(double x) const {
  double sum = 0.0;
  for (double xi : obs_) sum += std_normal_cdf((x - xi) / h_);
  return sum / static_cast<double>(obs_.size());
}

double LinearKde::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("LinearKde::quantile: u must lie inside (0, 1)");
  }
  const auto [mn, mx] = std::minmax_element(obs_.begin(), obs_.end());
  double lo = *mn - 10.0 * h_, hi = *mx + 10.0 * h_;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = cdf(x) - u;
    if (f > 0.0) hi = x; else lo = x;
    const double d = density(x);
    double next = (d > 1e-300) ? x - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-12 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

double LinearKde::scale() const {
  // Variance of the estimate: sample variance plus the kernel variance.
  return std::sqrt(obs_sd_ * obs_sd_ + h_ * h_);
}

} // namespace cyldens
