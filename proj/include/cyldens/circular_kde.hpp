#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cyldens/models.hpp"

namespace cyldens {

//! Circular kernel density estimator with the exponential kernel, i.e. a
//! mixture of von Mises bumps of concentration nu at the observations. The
//! normalizing constant is c0(nu) = 1 / (2 pi I0(nu)).
class CircularKde final : public CircularModel {
public:
  CircularKde(std::span<const double> angles, double nu);

  double density(double theta) const override;
  double cdf(double theta) const override;
  double quantile(double u) const override;

  double concentration() const { return nu_; }
  double normalizing_constant() const { return c0_; }
  std::span<const double> observations() const { return obs_; }

private:
  struct CdfCache;
  const CdfCache& cache() const;

  std::vector<double> obs_;
  double nu_;
  double c0_;       // 1 / (2 pi I0(nu))
  double log_norm_; // log(2 pi I0(nu))
  std::shared_ptr<CdfCache> cache_;
};

//! Fit with an explicit concentration bandwidth, or select one by maximizing
//! the leave-one-out log likelihood over a 60-point logarithmic grid on
//! [0.05, 500] refined by golden-section search.
//! Throws FitError when selection is impossible (identical angles).
CircularKde ckde_fit(std::span<const double> angles,
                     std::optional<double> bandwidth = std::nullopt);

//! Leave-one-out log likelihood of the estimator at concentration nu.
double ckde_loo_log_likelihood(std::span<const double> angles, double nu);

//! The LCV-selected concentration (exposed for bandwidth diagnostics).
double likelihood_cv_concentration(std::span<const double> angles);

} // namespace cyldens
