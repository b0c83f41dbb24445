#pragma once

#include <memory>

namespace cyldens {

//! A fitted circular distribution: density, distribution function started at
//! angle zero, and quantile, all on [0, 2pi).
class CircularModel {
public:
  virtual ~CircularModel() = default;
  virtual double density(double theta) const = 0;
  virtual double cdf(double theta) const = 0;
  virtual double quantile(double u) const = 0;
  virtual bool is_uniform() const { return false; }
};

//! A fitted distribution on the real line.
class LinearModel {
public:
  virtual ~LinearModel() = default;
  virtual double density(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual double quantile(double u) const = 0;
  //! Standard deviation of the fitted distribution (used for grid windows).
  virtual double scale() const = 0;
};

using CircularModelPtr = std::shared_ptr<const CircularModel>;
using LinearModelPtr = std::shared_ptr<const LinearModel>;

} // namespace cyldens
