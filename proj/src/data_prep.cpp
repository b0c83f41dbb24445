#include "cyldens/data_prep.hpp"

#include <algorithm>
#include <cmath>

#include "cyldens/errors.hpp"
#include "cyldens/linear_kde.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/rng.hpp"

namespace cyldens {

double robust_sigma(std::span<const double> sample) {
  if (sample.size() < 4) {
    throw DataError("robust_sigma: need at least four observations");
  }
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double iqr = sample_quantile(s, 0.75) - sample_quantile(s, 0.25);
  if (!(iqr > 0.0)) {
    throw DataError("robust_sigma: zero interquartile range; the sample is too "
                    "discrete to perturb meaningfully before averaging");
  }
  return iqr / 1.349;
}

double epanechnikov_quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("epanechnikov_quantile: u must lie in [0, 1]");
  }
  // On (-1, 1): 2u - 1 = (3x - x^3)/2, solved by x = 2 sin(asin(2u - 1)/3);
  // scale by sqrt 5 for the (-sqrt 5, sqrt 5) support.
  const double x = 2.0 * std::sin(std::asin(2.0 * u - 1.0) / 3.0);
  return std::sqrt(5.0) * x;
}

std::vector<double> perturb_linear(std::span<const double> sample,
                                   const PerturbationSpec& spec) {
  const double sigma = robust_sigma(sample);
  const double b = spec.linear_b_factor * sigma *
                   std::pow(static_cast<double>(sample.size()), spec.exponent);
  Rng rng(Rng::derive_seed(spec.seed, 1));
  std::vector<double> out;
  out.reserve(sample.size());
  for (double x : sample) {
    out.push_back(x + b * epanechnikov_quantile(rng.uniform01()));
  }
  return out;
}

std::vector<double> perturb_circular(std::span<const double> angles,
                                     const PerturbationSpec& spec) {
  if (angles.empty()) {
    throw DataError("perturb_circular: empty sample");
  }
  const double d = std::pow(static_cast<double>(angles.size()), spec.exponent);
  Rng rng(Rng::derive_seed(spec.seed, 2));
  const std::vector<double> noise = vm_sample(angles.size(), spec.circular_noise, rng);
  std::vector<double> out;
  out.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    // Noise is drawn on [0, 2pi); recentre it to (-pi, pi] before scaling.
    double eps = noise[i];
    if (eps > kPi) eps -= kTwoPi;
    out.push_back(wrap_angle(angles[i] + d * eps));
  }
  return out;
}

HourlyAverages hourly_average(std::span<const std::int64_t> timestamps,
                              std::span<const double> theta,
                              std::span<const double> x) {
  if (timestamps.size() != theta.size() || timestamps.size() != x.size()) {
    throw DataError("hourly_average: channel lengths differ");
  }
  if (!std::is_sorted(timestamps.begin(), timestamps.end())) {
    throw DataError("hourly_average: timestamps must be sorted");
  }
  HourlyAverages out;
  std::size_t i = 0;
  while (i < timestamps.size()) {
    const std::int64_t hour = timestamps[i] >= 0
                                  ? timestamps[i] / 3600
                                  : (timestamps[i] - 3599) / 3600;
    double sum_x = 0.0, sum_sin = 0.0, sum_cos = 0.0;
    std::size_t count = 0;
    while (i < timestamps.size() && timestamps[i] >= hour * 3600 &&
           timestamps[i] < (hour + 1) * 3600) {
      sum_x += x[i];
      sum_sin += std::sin(theta[i]);
      sum_cos += std::cos(theta[i]);
      ++count;
      ++i;
    }
    out.hour_start.push_back(hour * 3600);
    out.x.push_back(sum_x / static_cast<double>(count));
    out.theta.push_back(wrap_angle(std::atan2(sum_sin, sum_cos)));
    out.count.push_back(count);
  }
  return out;
}

std::vector<char> flag_detection_limit(std::span<const double> values, double limit) {
  std::vector<char> mask;
  mask.reserve(values.size());
  for (double v : values) mask.push_back(v <= limit ? 1 : 0);
  return mask;
}

} // namespace cyldens
