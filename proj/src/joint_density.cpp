#include "cyldens/joint_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyldens/circular_kde.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/linear_kde.hpp"
#include "cyldens/math_util.hpp"

namespace cyldens {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::jwp: return "jwp";
    case Variant::jwsp: return "jwsp";
    case Variant::jwnp: return "jwnp";
    case Variant::csp: return "csp";
    case Variant::cnp: return "cnp";
    case Variant::analytic: return "analytic";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::jwp, Variant::jwsp, Variant::jwnp, Variant::csp,
                    Variant::cnp, Variant::analytic}) {
    if (name == variant_name(v)) return v;
  }
  throw std::invalid_argument("unknown variant: " + name);
}

JointDensity::JointDensity(CircularModelPtr circular, LinearModelPtr linear,
                           CopulaPtr copula, Variant tag)
    : circ_(std::move(circular)), lin_(std::move(linear)), cop_(std::move(copula)),
      tag_(tag) {
  if (!circ_ || !lin_ || !cop_) {
    throw std::invalid_argument("JointDensity: null component model");
  }
}

double JointDensity::eval(double theta, double x) const {
  const double t = wrap_angle(theta);
  const double u = clamp01(circ_->cdf(t));
  const double v = clamp01(lin_->cdf(x));
  return cop_->density(u, v) * circ_->density(t) * lin_->density(x);
}

std::vector<double> JointDensity::eval_grid(std::span<const double> thetas,
                                            std::span<const double> xs) const {
  const std::size_t nt = thetas.size(), nx = xs.size();
  std::vector<double> us(nt), fs_t(nt), vs(nx), fs_x(nx);
  for (std::size_t i = 0; i < nt; ++i) {
    // The closed endpoint stays at 2 pi so integration grids keep the
    // transformed axis sorted (the copula edge condition makes the value
    // identical either way).
    const double t = (thetas[i] == kTwoPi) ? kTwoPi : wrap_angle(thetas[i]);
    us[i] = clamp01(circ_->cdf(t));
    fs_t[i] = circ_->density(t);
  }
  for (std::size_t j = 0; j < nx; ++j) {
    vs[j] = clamp01(lin_->cdf(xs[j]));
    fs_x[j] = lin_->density(xs[j]);
  }
  std::vector<double> out(nt * nx);
  cop_->density_grid(us, vs, out.data());
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      out[i * nx + j] *= fs_t[i] * fs_x[j];
    }
  }
  return out;
}

double jw_density(double theta, double x, const CircularModel& joining,
                  const CircularModel& circ_marginal, const LinearModel& lin_marginal,
                  JoinSign sign) {
  const double t = wrap_angle(theta);
  const double u = clamp01(circ_marginal.cdf(t));
  const double v = clamp01(lin_marginal.cdf(x));
  const double arg = kTwoPi * (sign == JoinSign::minus ? u - v : u + v);
  const double g = joining.is_uniform() ? 1.0
                                        : kTwoPi * joining.density(wrap_angle(arg));
  return g * circ_marginal.density(t) * lin_marginal.density(x);
}

ExampleParams default_example_params(int id) {
  ExampleParams p;
  switch (id) {
    case 1:
      p.join_mu = kPi;
      p.join_kappa = 2.0;
      break;
    case 2:
      p.join_mu = kPi;
      p.join_kappa = 5.0;
      p.circ_mu = 0.5 * kPi;
      p.circ_kappa = 2.0;
      break;
    case 3:
      p.alpha = kInvTwoPi;
      p.circ_mu = 0.5 * kPi;
      p.circ_kappa = 0.5;
      break;
    case 4:
      p.alpha = 10.0;
      p.circ_mu = 0.5 * kPi;
      p.circ_kappa = 0.5;
      break;
    default:
      throw std::invalid_argument("example id must be 1..4");
  }
  return p;
}

JointDensity make_example_density(int id) {
  return make_example_density(id, default_example_params(id));
}

JointDensity make_example_density(int id, const ExampleParams& p) {
  const auto lin = std::make_shared<Normal>(p.lin_mean, p.lin_sd);
  switch (id) {
    case 1: {
      auto circ = std::make_shared<VonMises>(0.0, 0.0); // circular uniform
      auto join = std::make_shared<VonMises>(p.join_mu, p.join_kappa);
      return JointDensity(circ, lin, std::make_shared<JwLinkCopula>(join),
                          Variant::analytic);
    }
    case 2: {
      auto circ = std::make_shared<VonMises>(p.circ_mu, p.circ_kappa);
      auto join = std::make_shared<VonMises>(p.join_mu, p.join_kappa);
      return JointDensity(circ, lin, std::make_shared<JwLinkCopula>(join),
                          Variant::analytic);
    }
    case 3: {
      auto circ = std::make_shared<VonMises>(p.circ_mu, p.circ_kappa);
      return JointDensity(circ, lin, std::make_shared<QsCopula>(p.alpha),
                          Variant::analytic);
    }
    case 4: {
      auto circ = std::make_shared<VonMises>(p.circ_mu, p.circ_kappa);
      return JointDensity(circ, lin, std::make_shared<ReflectedFrankCopula>(p.alpha),
                          Variant::analytic);
    }
    default:
      throw std::invalid_argument("example id must be 1..4");
  }
}

namespace {

bool has_ties(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) != values.end();
}

// Parametric circular marginal: Rayleigh pretest at the 5% level, then
// bias-corrected ML. Without the pretest a uniform marginal inherits
// spurious concentration of order n^{-1/2} from the resultant length.
VonMisesParams fit_circular_marginal(std::span<const double> theta) {
  double s = 0.0, c = 0.0;
  for (double t : theta) {
    s += std::sin(t);
    c += std::cos(t);
  }
  const double n = static_cast<double>(theta.size());
  const double rayleigh = (s * s + c * c) / n;
  if (rayleigh <= 2.9957) { // exp(-z) = 0.05
    return VonMisesParams{0.0, 0.0};
  }
  return vm_fit_ml_bias_corrected(theta);
}

[[noreturn]] void tie_error(Variant variant, const char* component) {
  throw DataError(std::string(variant_name(variant)) + ": exact ties in the " +
                  component +
                  " component prevent bandwidth selection; perturb the data "
                  "first (cmd_prep --perturb)");
}

} // namespace

JointDensity fit_joint(const CylindricalSample& sample, Variant variant,
                       const FitOptions& options, FitSummary* summary) {
  if (variant == Variant::analytic) {
    throw std::invalid_argument("fit_joint: analytic is not a fittable variant");
  }
  const std::size_t n = sample.size();
  if (n < 10 || sample.x.size() != n) {
    throw FitError("fit_joint: need a consistent sample of at least 10 pairs");
  }
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = wrap_angle(sample.theta[i]);

  const bool parametric_marginals =
      variant == Variant::jwp || variant == Variant::jwsp || variant == Variant::csp;
  const bool copula_variant = variant == Variant::csp || variant == Variant::cnp;

  const bool select_circ = !parametric_marginals && !options.circular_bandwidth;
  const bool select_lin = !parametric_marginals && !options.linear_bandwidth;
  const bool select_join = (variant == Variant::jwsp || variant == Variant::jwnp) &&
                           !options.joining_bandwidth;
  const bool select_cop = copula_variant && !options.copula_bandwidth;

  if ((select_circ || select_cop) && has_ties(theta)) tie_error(variant, "circular");
  if ((select_lin || select_cop) && has_ties(sample.x)) tie_error(variant, "linear");

  FitSummary local;
  FitSummary& s = summary ? *summary : local;

  try {
    // Step 1: marginal densities and distributions.
    CircularModelPtr circ;
    LinearModelPtr lin;
    if (parametric_marginals) {
      const VonMisesParams cp = fit_circular_marginal(theta);
      const NormalParams lp = normal_fit_ml(sample.x);
      s.circular_params = cp;
      s.linear_params = lp;
      circ = std::make_shared<VonMises>(cp);
      lin = std::make_shared<Normal>(lp);
    } else {
      auto ck = std::make_shared<CircularKde>(
          ckde_fit(theta, options.circular_bandwidth));
      auto lk = std::make_shared<LinearKde>(lkde_fit(sample.x, options.linear_bandwidth));
      s.circular_bandwidth = ck->concentration();
      s.linear_bandwidth = lk->bandwidth();
      s.sj_fallback = lk->bandwidth_method() == BandwidthMethod::silverman_fallback;
      circ = ck;
      lin = lk;
    }

    // Step 2: transform the sample and estimate the dependence component.
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = clamp01(circ->cdf(theta[i]));
      v[i] = clamp01(lin->cdf(sample.x[i]));
    }

    CopulaPtr copula;
    if (copula_variant) {
      copula = std::make_shared<KernelCopula>(
          kernel_copula_fit(u, v, options.copula_bandwidth));
      s.copula_bandwidth =
          static_cast<const KernelCopula&>(*copula).bandwidth();
    } else {
      std::vector<double> xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = wrap_angle(kTwoPi * (u[i] - v[i]));
      CircularModelPtr joining;
      if (variant == Variant::jwp) {
        const VonMisesParams jp = vm_fit_ml_bias_corrected(xi);
        s.joining_params = jp;
        joining = std::make_shared<VonMises>(jp);
      } else {
        if (select_join && has_ties(xi)) tie_error(variant, "joining");
        auto jk = std::make_shared<CircularKde>(
            ckde_fit(xi, options.joining_bandwidth));
        s.joining_bandwidth = jk->concentration();
        joining = jk;
      }
      copula = std::make_shared<JwLinkCopula>(joining, JoinSign::minus);
    }

    // Step 3: assemble the joint density.
    return JointDensity(std::move(circ), std::move(lin), std::move(copula), variant);
  } catch (const DataError&) {
    throw;
  } catch (const FitError& e) {
    throw FitError(std::string(variant_name(variant)) + ": " + e.what());
  }
}

} // namespace cyldens
