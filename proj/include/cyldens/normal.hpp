#pragma once

#include <span>

#include "cyldens/models.hpp"

namespace cyldens {

//! Gaussian parameters; sd must be strictly positive.
struct NormalParams {
  double mean = 0.0;
  double sd = 1.0;
};

class Normal final : public LinearModel {
public:
  explicit Normal(NormalParams p);
  Normal(double mean, double sd) : Normal(NormalParams{mean, sd}) {}

  double density(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  double scale() const override { return params_.sd; }

  const NormalParams& params() const { return params_; }

private:
  NormalParams params_;
};

double normal_density(double x, const NormalParams& p);
double normal_cdf(double x, const NormalParams& p);
//! Inverse distribution function. Throws std::domain_error at u in {0, 1}
//! (the value would be infinite) and outside [0, 1].
double normal_quantile(double u, const NormalParams& p);

//! Standard normal helpers.
double std_normal_cdf(double z);
double std_normal_quantile(double u);

//! Maximum likelihood fit: sample mean and 1/n standard deviation.
//! Throws FitError for samples of size < 2 or zero variance.
NormalParams normal_fit_ml(std::span<const double> sample);

} // namespace cyldens
