#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cyldens/models.hpp"

namespace cyldens {

class Rng;

//! Parameters of a von Mises distribution: circular mean in [0, 2pi) and
//! nonnegative concentration. kappa = 0 is the circular uniform.
struct VonMisesParams {
  double mu = 0.0;
  double kappa = 0.0;
};

//! von Mises distribution model. The distribution function is cached on a
//! 512-interval cumulative grid (built lazily, shared between copies) for
//! repeated evaluation; see vm_cdf/vm_quantile for the quadrature-accurate
//! free-function forms.
class VonMises final : public CircularModel {
public:
  explicit VonMises(VonMisesParams p);
  VonMises(double mu, double kappa) : VonMises(VonMisesParams{mu, kappa}) {}

  double density(double theta) const override;
  double cdf(double theta) const override;
  double quantile(double u) const override;
  bool is_uniform() const override { return params_.kappa == 0.0; }

  //! Distribution function by adaptive Simpson quadrature (abs tol 1e-10).
  double cdf_exact(double theta) const;

  //! Copy with a different mean, sharing the concentration cache.
  VonMises with_mean(double mu) const;

  const VonMisesParams& params() const { return params_; }

private:
  struct Cache;
  const Cache& cache() const;
  //! G(t) = integral over [0, t] of the kappa-concentration density centered
  //! at zero, extended to the real line by G(t + 2pi k) = G(t) + k.
  double base_cdf_ext(double t) const;
  double base_quantile(double y) const;

  VonMisesParams params_;
  double log_norm_; // log(2 pi I0(kappa))
  std::shared_ptr<Cache> cache_;
};

//! Density of the von Mises distribution.
double vm_density(double theta, const VonMisesParams& p);

//! Distribution function with the zero angle as starting point, by adaptive
//! Simpson quadrature (absolute tolerance 1e-10).
double vm_cdf(double theta, const VonMisesParams& p);

//! Quantile: bisection on the cached grid refined by Newton steps against the
//! quadrature distribution function. Throws std::domain_error outside [0, 1].
double vm_quantile(double u, const VonMisesParams& p);

//! Maximum likelihood fit. The mean is the sample circular mean direction;
//! kappa solves I1(kappa)/I0(kappa) = mean resultant length by safeguarded
//! Newton on [1e-8, 700]. Throws FitError for degenerate samples.
VonMisesParams vm_fit_ml(std::span<const double> angles);

//! ML fit with Fisher's small-sample bias correction of the concentration:
//! kappa < 2 is shrunk by 2/(n kappa) (floored at zero), kappa >= 2 scaled by
//! (n-1)^3/(n^3+n). Near-uniform samples no longer inherit spurious
//! concentration from the resultant-length noise.
VonMisesParams vm_fit_ml_bias_corrected(std::span<const double> angles);

//! n independent draws by the Best–Fisher rejection sampler; deterministic
//! for a fixed seed.
std::vector<double> vm_sample(std::size_t n, const VonMisesParams& p,
                              std::uint64_t seed);
std::vector<double> vm_sample(std::size_t n, const VonMisesParams& p, Rng& rng);

} // namespace cyldens
