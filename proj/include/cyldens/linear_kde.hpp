#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cyldens/models.hpp"

namespace cyldens {

enum class BandwidthMethod { explicit_value, sheather_jones, silverman_fallback };

//! Gaussian kernel density estimator on the real line. The distribution
//! function is the average of kernel CDFs, so its derivative equals the
//! density exactly.
class LinearKde final : public LinearModel {
public:
  LinearKde(std::span<const double> sample, double bandwidth,
            BandwidthMethod method = BandwidthMethod::explicit_value);

  double density(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double scale() const override;

  double bandwidth() const { return h_; }
  BandwidthMethod bandwidth_method() const { return method_; }
  std::span<const double> observations() const { return obs_; }

private:
  std::vector<double> obs_;
  double h_;
  BandwidthMethod method_;
  double obs_sd_ = 0.0;
};

//! Fit with an explicit bandwidth, or select one by the Sheather–Jones
//! solve-the-equation rule when omitted (Silverman fallback when the fixed
//! point cannot be bracketed; the model records which method was used).
//! Throws FitError for degenerate samples, pointing at data perturbation.
LinearKde lkde_fit(std::span<const double> sample,
                   std::optional<double> bandwidth = std::nullopt);

//! Sheather–Jones solve-the-equation bandwidth. Returns the selected value
//! and whether the Silverman fallback was taken.
std::pair<double, bool> sheather_jones_bandwidth(std::span<const double> sample);

//! Silverman's rule of thumb, 0.9 min(sd, IQR/1.349) n^{-1/5}.
double silverman_bandwidth(std::span<const double> sample);

//! Linear-interpolation sample quantile (R type 7).
double sample_quantile(std::span<const double> sorted, double p);

} // namespace cyldens
