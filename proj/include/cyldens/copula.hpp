#pragma once

#include <memory>
#include <span>

#include "cyldens/models.hpp"
#include "cyldens/von_mises.hpp"

namespace cyldens {

//! Copula density on the unit square. Circular–linear families additionally
//! satisfy the edge condition c(0, v) = c(1, v).
class Copula {
public:
  virtual ~Copula() = default;

  //! Copula density; throws std::domain_error outside [0, 1]^2.
  virtual double density(double u, double v) const = 0;

  //! Conditional distribution of the second argument given the first,
  //! C_u(v) = integral of c(u, t) over t in [0, v].
  virtual double conditional(double u, double v) const = 0;

  //! Inverse of the conditional; closed form where one exists, otherwise
  //! monotone numeric inversion. Endpoints map to endpoints.
  virtual double conditional_inverse(double u, double w) const;

  //! Batch density over a tensor grid, row-major in the first argument.
  //! The default loops over density(); heavy estimators override it.
  virtual void density_grid(std::span<const double> us, std::span<const double> vs,
                            double* out) const;

  virtual bool is_independence() const { return false; }
};

using CopulaPtr = std::shared_ptr<const Copula>;

//! Generic monotone inversion of Copula::conditional: bisection to width
//! 1e-10 followed by two Newton polishing steps using the density.
double conditional_inverse_numeric(const Copula& c, double u, double w);

//! The independence copula, c = 1.
class IndependenceCopula final : public Copula {
public:
  double density(double u, double v) const override;
  double conditional(double u, double v) const override;
  double conditional_inverse(double u, double w) const override;
  bool is_independence() const override { return true; }
};

//! Circular–linear copula induced by a joining circular density g through
//! c(u, v) = 2 pi g(2 pi (u -+ v)). The minus form is the default.
enum class JoinSign { minus, plus };

class JwLinkCopula final : public Copula {
public:
  JwLinkCopula(CircularModelPtr joining, JoinSign sign = JoinSign::minus);

  double density(double u, double v) const override;
  double conditional(double u, double v) const override;
  double conditional_inverse(double u, double w) const override;

  const CircularModel& joining() const { return *joining_; }
  JoinSign sign() const { return sign_; }

private:
  double argument(double u, double v) const;

  CircularModelPtr joining_;
  JoinSign sign_;
  const VonMises* vm_joining_; // non-owning; set when the joining model is vM
};

//! Copula with quadratic sections in the linear coordinate,
//! c(u, v) = 1 + 2 pi alpha cos(2 pi u)(1 - 2v), |alpha| <= 1/(2 pi).
class QsCopula final : public Copula {
public:
  explicit QsCopula(double alpha);

  double density(double u, double v) const override;
  double conditional(double u, double v) const override;
  double conditional_inverse(double u, double w) const override;

  double alpha() const { return alpha_; }

private:
  double alpha_;
};

//! The Frank copula (not circular by itself; used as the base of the
//! reflected construction and directly in simulation checks).
class FrankCopula final : public Copula {
public:
  explicit FrankCopula(double alpha); // alpha != 0

  double density(double u, double v) const override;
  double conditional(double u, double v) const override;
  double conditional_inverse(double u, double w) const override;

  double alpha() const { return alpha_; }

private:
  double alpha_;
};

//! Four-term reflection mixture of a Frank copula, periodic in both
//! arguments and hence circular–linear.
class ReflectedFrankCopula final : public Copula {
public:
  explicit ReflectedFrankCopula(double alpha);

  double density(double u, double v) const override;
  double conditional(double u, double v) const override;

  double alpha() const { return frank_.alpha(); }

private:
  FrankCopula frank_;
};

} // namespace cyldens
