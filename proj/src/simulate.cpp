#include "cyldens/simulate.hpp"

#include <cmath>

#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/rng.hpp"

namespace cyldens {

std::vector<std::pair<double, double>> simulate_copula_pairs(const Copula& copula,
                                                             std::size_t n,
                                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    const double w = rng.uniform01();
    const double v = copula.conditional_inverse(u, w);
    if (!std::isfinite(v)) {
      throw NumericError("simulate_copula_pairs: non-finite conditional inverse");
    }
    out.emplace_back(u, clamp01(v));
  }
  return out;
}

CylindricalSample simulate(const SimulationSpec& spec) {
  Rng rng(spec.seed);
  CylindricalSample sample;
  sample.theta.reserve(spec.n);
  sample.x.reserve(spec.n);
  const auto& circ = spec.model.circular();
  const auto& lin = spec.model.linear();
  const auto& cop = spec.model.copula();
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = rng.uniform01();
    const double w = rng.uniform01();
    double v = clamp01(cop.conditional_inverse(u, w));
    // Uniform draws are strictly inside (0, 1); the conditional inverse can
    // still land on an endpoint, which linear quantiles cannot take.
    if (v <= 0.0) v = 1e-15;
    if (v >= 1.0) v = 1.0 - 1e-16;
    const double theta = wrap_angle(circ.quantile(u));
    const double x = lin.quantile(v);
    if (!std::isfinite(theta) || !std::isfinite(x)) {
      throw NumericError("simulate: non-finite draw");
    }
    sample.theta.push_back(theta);
    sample.x.push_back(x);
  }
  return sample;
}

} // namespace cyldens
