#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cyldens/von_mises.hpp"

namespace cyldens {

//! Tie-breaking perturbation settings. The linear channel adds
//! b = b_factor * sigma_hat * n^exponent times Epanechnikov noise on
//! (-sqrt 5, sqrt 5); the circular channel adds n^exponent times von Mises
//! noise, wrapped back to [0, 2pi).
struct PerturbationSpec {
  double linear_b_factor = 1.3;
  double exponent = -1.0 / 3.0;
  VonMisesParams circular_noise{0.0, 1.0};
  std::uint64_t seed = 0;
};

//! Robust spread estimate: interquartile range over 1.349. Requires n >= 4
//! and a nonzero IQR.
double robust_sigma(std::span<const double> sample);

//! Inverse distribution function of the Epanechnikov kernel on
//! (-sqrt 5, sqrt 5); the cubic is solved in closed trigonometric form.
double epanechnikov_quantile(double u);

std::vector<double> perturb_linear(std::span<const double> sample,
                                   const PerturbationSpec& spec);
std::vector<double> perturb_circular(std::span<const double> angles,
                                     const PerturbationSpec& spec);

//! Hourly averages of minute-level paired observations. Timestamps are epoch
//! seconds and must be sorted; hours with no observations are omitted. The
//! circular channel uses the wrap-aware (atan2) mean.
struct HourlyAverages {
  std::vector<std::int64_t> hour_start; // epoch seconds of each hour bucket
  std::vector<double> theta;
  std::vector<double> x;
  std::vector<std::size_t> count;
};

HourlyAverages hourly_average(std::span<const std::int64_t> timestamps,
                              std::span<const double> theta,
                              std::span<const double> x);

//! Mask of values at or below the detection limit; no imputation is done.
std::vector<char> flag_detection_limit(std::span<const double> values, double limit);

} // namespace cyldens
