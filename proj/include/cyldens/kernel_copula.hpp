#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cyldens/copula.hpp"

namespace cyldens {

//! Restricted bandwidth matrix [[diag, off], [off, diag]] on the
//! standard-deviation scale; positive definite (diag > |off|).
struct BandwidthMatrix {
  double diag = 0.1;
  double off = 0.0;
};

void validate(const BandwidthMatrix& b);

//! The nine circular-mirror images of a unit-square point, ordered by rows:
//! bottom (u-1,-v),(u,-v),(u+1,-v); middle (u-1,v),(u,v),(u+1,v);
//! top (u-1,2-v),(u,2-v),(u+1,2-v).
std::array<std::pair<double, double>, 9> reflect_point(double u, double v);

//! Kernel copula density estimator: bivariate Gaussian kernels over the nine
//! circular-mirror images of the pseudo-observations, periodic in the first
//! argument by construction.
class KernelCopula final : public Copula {
public:
  KernelCopula(std::span<const double> u, std::span<const double> v,
               BandwidthMatrix b);

  double density(double u, double v) const override;
  void density_grid(std::span<const double> us, std::span<const double> vs,
                    double* out) const override;
  double conditional(double u, double v) const override;

  const BandwidthMatrix& bandwidth() const { return b_; }
  std::size_t sample_size() const { return n_; }

private:
  double density_unchecked(double u, double v) const;

  std::size_t n_;
  std::vector<double> img_u_, img_v_; // 9n reflected images
  std::vector<double> obs_u_, obs_v_;
  BandwidthMatrix b_;
  double inv_d_, inv_o_; // B^{-1} = [[inv_d, inv_o], [inv_o, inv_d]]
  double norm_;          // 1 / (2 pi |B| n)
  double window_;        // prune radius per axis
};

//! Fit the kernel copula, selecting the bandwidth matrix by least-squares
//! cross-validation when none is given. Pseudo-observations must lie in
//! [0,1]^2 up to 1e-12 of rounding (they are clamped); anything further out
//! is a contract violation upstream. Requires n >= 10.
KernelCopula kernel_copula_fit(std::span<const double> u, std::span<const double> v,
                               std::optional<BandwidthMatrix> bandwidth = std::nullopt);

//! Bivariate normal-reference bandwidth with the common-diagonal restriction.
BandwidthMatrix normal_reference_bandwidth(std::span<const double> u,
                                           std::span<const double> v);

//! Least-squares cross-validation over a 20 x 11 grid (diag log-spaced on
//! [0.01, 0.5], off on [-0.8 diag, 0.8 diag]) plus the normal-reference
//! candidate. Throws FitError for degenerate pseudo-observations.
BandwidthMatrix select_copula_bandwidth(std::span<const double> u,
                                        std::span<const double> v);

//! The cross-validation score of one candidate (exposed for the selector
//! tests; the selector returns the grid argmin of this function).
double copula_lscv_score(std::span<const double> u, std::span<const double> v,
                         const BandwidthMatrix& b);

} // namespace cyldens
