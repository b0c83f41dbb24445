#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace cyldens {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kInvTwoPi = 1.0 / kTwoPi;

//! Reduce an angle to [0, 2pi).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

//! Adaptive Simpson integration of f over [a, b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 40);

//! Composite Simpson weights for n_intervals (must be even) on a uniform grid
//! of n_intervals + 1 nodes with spacing h.
std::vector<double> simpson_weights(std::size_t n_intervals, double h);

//! Cumulative integral of a sampled function over a uniform grid.
//! values must hold f at the 2*n_intervals + 1 points of the half-step grid;
//! returns the n_intervals + 1 cumulative Simpson values at the whole-step nodes.
std::vector<double> cumulative_simpson(const std::vector<double>& half_step_values,
                                       double h);

//! Monotone cubic-Hermite interpolant (Fritsch–Carlson limited slopes) of a
//! nondecreasing function sampled on a uniform grid together with its exact
//! derivative values. Slopes larger than three times the local secant are
//! clipped so the interpolant cannot overshoot.
class MonotoneCubicCdf {
public:
  MonotoneCubicCdf() = default;
  //! nodes: x0 + i*h, i = 0..n; values: F at nodes; slopes: F' at nodes.
  MonotoneCubicCdf(double x0, double h, std::vector<double> values,
                   std::vector<double> slopes);

  double operator()(double x) const;
  double derivative(double x) const;
  //! Inverse by bisection over nodes plus Newton polishing on the cubic.
  double inverse(double y) const;

  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

private:
  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

} // namespace cyldens
