#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cyldens/joint_density.hpp"

namespace cyldens {

//! What to draw: a joint model whose marginals expose quantiles and whose
//! copula conditional can be inverted, a sample size and a seed.
struct SimulationSpec {
  JointDensity model;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

//! Conditional-method sampler: draw (U, W) uniform, invert the copula
//! conditional to get V, then apply the marginal quantiles. Deterministic
//! for a fixed seed; U and W are drawn interleaved from a single stream.
CylindricalSample simulate(const SimulationSpec& spec);

//! Copula-level sampler, exposed for dependence-structure tests.
std::vector<std::pair<double, double>> simulate_copula_pairs(const Copula& copula,
                                                             std::size_t n,
                                                             std::uint64_t seed);

} // namespace cyldens
