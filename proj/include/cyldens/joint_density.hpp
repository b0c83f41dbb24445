#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyldens/copula.hpp"
#include "cyldens/kernel_copula.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/models.hpp"
#include "cyldens/normal.hpp"
#include "cyldens/von_mises.hpp"

namespace cyldens {

//! Paired (angle, value) observations on the cylinder.
struct CylindricalSample {
  std::vector<double> theta; // radians, reduced to [0, 2pi)
  std::vector<double> x;

  std::size_t size() const { return theta.size(); }
};

enum class Variant { jwp, jwsp, jwnp, csp, cnp, analytic };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

//! A circular-linear density p(theta, x) = c(Psi(theta), F(x)) phi(theta) f(x)
//! assembled from two marginal models and a copula density.
class JointDensity {
public:
  JointDensity(CircularModelPtr circular, LinearModelPtr linear, CopulaPtr copula,
               Variant tag);

  double eval(double theta, double x) const;
  double operator()(double theta, double x) const { return eval(theta, x); }

  //! Row-major outer evaluation: out[i * xs.size() + j] = p(thetas[i], xs[j]).
  std::vector<double> eval_grid(std::span<const double> thetas,
                                std::span<const double> xs) const;

  const CircularModel& circular() const { return *circ_; }
  const LinearModel& linear() const { return *lin_; }
  const Copula& copula() const { return *cop_; }
  CircularModelPtr circular_ptr() const { return circ_; }
  LinearModelPtr linear_ptr() const { return lin_; }
  CopulaPtr copula_ptr() const { return cop_; }
  Variant tag() const { return tag_; }

private:
  CircularModelPtr circ_;
  LinearModelPtr lin_;
  CopulaPtr cop_;
  Variant tag_;
};

//! Pointwise circular-linear density with a joining circular density g:
//! 2 pi g(2 pi (Psi(theta) -+ F(x))) phi(theta) f(x).
double jw_density(double theta, double x, const CircularModel& joining,
                  const CircularModel& circ_marginal, const LinearModel& lin_marginal,
                  JoinSign sign = JoinSign::minus);

//! Parameters of the four benchmark densities. Unused fields are ignored by
//! the examples that do not reference them.
struct ExampleParams {
  double join_mu = kPi;    // joining density mean (examples 1-2)
  double join_kappa = 2.0; // joining density concentration
  double circ_mu = 0.0;    // circular marginal mean (examples 2-4)
  double circ_kappa = 0.0; // circular marginal concentration
  double alpha = 0.0;      // copula parameter (examples 3-4)
  double lin_mean = 0.0;
  double lin_sd = 1.0;
};

ExampleParams default_example_params(int id);
JointDensity make_example_density(int id);
JointDensity make_example_density(int id, const ExampleParams& params);

//! Per-component bandwidth overrides for reproducible fits.
struct FitOptions {
  std::optional<double> circular_bandwidth;       // marginal KDE concentration
  std::optional<double> linear_bandwidth;         // marginal KDE bandwidth
  std::optional<double> joining_bandwidth;        // joining-density KDE concentration
  std::optional<BandwidthMatrix> copula_bandwidth;
};

//! What the fit selected, for summaries and provenance.
struct FitSummary {
  std::optional<VonMisesParams> circular_params;
  std::optional<NormalParams> linear_params;
  std::optional<VonMisesParams> joining_params;
  std::optional<double> circular_bandwidth;
  std::optional<double> linear_bandwidth;
  std::optional<double> joining_bandwidth;
  std::optional<BandwidthMatrix> copula_bandwidth;
  bool sj_fallback = false;
};

//! The three-step estimator: fit marginals, transform the sample, estimate
//! the joining density (JW variants) or the copula density (copula variants),
//! and assemble the joint model.
JointDensity fit_joint(const CylindricalSample& sample, Variant variant,
                       const FitOptions& options = {},
                       FitSummary* summary = nullptr);

} // namespace cyldens
