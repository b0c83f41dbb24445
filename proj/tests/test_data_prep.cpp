#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "cyldens/data_prep.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/von_mises.hpp"

using namespace cyldens;

namespace {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

double circular_mean(const std::vector<double>& a) {
  double s = 0.0, c = 0.0;
  for (double t : a) {
    s += std::sin(t);
    c += std::cos(t);
  }
  return wrap_angle(std::atan2(s, c));
}

} // namespace

TEST_CASE("robust_sigma standardizes the interquartile range") {
  // Sample whose empirical IQR is exactly 1.349.
  std::vector<double> x;
  for (int i = 0; i < 101; ++i) x.push_back(-1.349 + 2.0 * 1.349 * i / 100.0);
  CHECK(robust_sigma(x) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> flat(10, 3.0);
  CHECK_THROWS_AS(robust_sigma(flat), DataError);
  const std::vector<double> tiny{1.0, 2.0};
  CHECK_THROWS_AS(robust_sigma(tiny), DataError);

  std::mt19937_64 gen(4);
  std::normal_distribution<double> dist(0.0, 2.0);
  std::vector<double> big(5000);
  for (auto& v : big) v = dist(gen);
  CHECK(robust_sigma(big) == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("epanechnikov quantile endpoints and support") {
  CHECK(epanechnikov_quantile(0.0) == doctest::Approx(-std::sqrt(5.0)));
  CHECK(epanechnikov_quantile(0.5) == doctest::Approx(0.0));
  CHECK(epanechnikov_quantile(1.0) == doctest::Approx(std::sqrt(5.0)));
  // Round trip through the closed-form CDF of the kernel.
  for (double u : {0.05, 0.2, 0.5, 0.77, 0.93}) {
    const double x = epanechnikov_quantile(u);
    const double cdf = 0.5 + 3.0 / (4.0 * std::sqrt(5.0)) * (x - x * x * x / 15.0);
    CHECK(cdf == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("perturb_linear uses the documented scale and stays in support") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = dist(gen);
  const double sigma = robust_sigma(x);
  const double b = 1.3 * sigma * std::pow(1000.0, -1.0 / 3.0);

  PerturbationSpec spec;
  spec.seed = 99;
  const auto shifted = perturb_linear(x, spec);
  REQUIRE(shifted.size() == x.size());
  double max_shift = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    max_shift = std::max(max_shift, std::abs(shifted[i] - x[i]));
  }
  CHECK(max_shift <= b * std::sqrt(5.0) + 1e-12); // noise support is (-sqrt5, sqrt5)
  CHECK(max_shift > 0.0);

  // b-scale arithmetic from the recipe: sigma = 1, n = 1000 gives b = 0.13.
  CHECK(1.3 * 1.0 * std::pow(1000.0, -1.0 / 3.0) == doctest::Approx(0.13).epsilon(1e-12));

  // Ties are broken with probability one.
  std::vector<double> tied(500, 1.0);
  for (int i = 0; i < 500; ++i) tied.push_back(i % 7);
  std::sort(tied.begin(), tied.end());
  const auto unique_after = perturb_linear(tied, spec);
  std::set<double> uniq(unique_after.begin(), unique_after.end());
  CHECK(uniq.size() == unique_after.size());

  // Determinism.
  CHECK(perturb_linear(x, spec) == perturb_linear(x, spec));

  // Distribution preserved: two-sample KS non-significant at 1%.
  const double crit = 1.63 * std::sqrt(2.0 / 1000.0);
  CHECK(ks_two_sample(x, shifted) < crit);

  // Empirical CDF shift is bounded by the perturbation scale.
  std::vector<double> xs(x), ps(shifted);
  std::sort(xs.begin(), xs.end());
  std::sort(ps.begin(), ps.end());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sup = std::max(sup, std::abs(xs[i] - ps[i]));
  CHECK(sup < 2.0 * b * std::sqrt(5.0));
}

TEST_CASE("perturb_circular wraps and keeps the mean direction") {
  PerturbationSpec spec;
  spec.seed = 5;
  const auto base = vm_sample(1000, {kPi, 2.0}, 123);
  const auto out = perturb_circular(base, spec);
  REQUIRE(out.size() == base.size());
  for (double t : out) {
    CHECK(t >= 0.0);
    CHECK(t < kTwoPi);
  }
  CHECK(std::abs(circular_mean(out) - circular_mean(base)) < 0.05);
  CHECK(perturb_circular(base, spec) == perturb_circular(base, spec));

  // d-scale arithmetic: n = 1000 gives d = 0.1.
  CHECK(std::pow(1000.0, -1.0 / 3.0) == doctest::Approx(0.1).epsilon(1e-12));

  // Wrap check with an angle close to the cut.
  std::vector<double> edge(50, 6.28);
  const auto wrapped = perturb_circular(edge, spec);
  for (double t : wrapped) {
    CHECK(t >= 0.0);
    CHECK(t < kTwoPi);
  }

  const std::vector<double> empty;
  CHECK_THROWS_AS(perturb_circular(empty, spec), DataError);
}

TEST_CASE("perturbation is rotation equivariant in the hourly averaging sense") {
  // Rotating inputs rotates circular hourly means by the same angle.
  std::vector<std::int64_t> ts;
  std::vector<double> theta, x;
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> unif(0.0, kTwoPi);
  for (int i = 0; i < 180; ++i) {
    ts.push_back(1000000 + 60 * i);
    theta.push_back(unif(gen));
    x.push_back(1.0);
  }
  const double delta = 1.17;
  std::vector<double> rotated(theta);
  for (auto& t : rotated) t = wrap_angle(t + delta);
  const auto base = hourly_average(ts, theta, x);
  const auto rot = hourly_average(ts, rotated, x);
  for (std::size_t k = 0; k < base.theta.size(); ++k) {
    CHECK(wrap_angle(base.theta[k] + delta) == doctest::Approx(rot.theta[k]).epsilon(1e-12));
  }
}

TEST_CASE("hourly_average groups by calendar hour") {
  std::vector<std::int64_t> ts;
  std::vector<double> theta, x;
  for (int i = 0; i < 60; ++i) {
    ts.push_back(7200 + 60 * i); // one full hour starting at 02:00
    theta.push_back(0.5);
    x.push_back(5.0);
  }
  const auto one = hourly_average(ts, theta, x);
  REQUIRE(one.x.size() == 1);
  CHECK(one.x[0] == doctest::Approx(5.0));
  CHECK(one.hour_start[0] == 7200);
  CHECK(one.count[0] == 60);

  // Circular mean of symmetric angles around pi/2.
  const std::vector<std::int64_t> two{0, 100};
  const std::vector<double> ths{kPi / 2 - 0.1, kPi / 2 + 0.1};
  const std::vector<double> vals{1.0, 3.0};
  const auto sym = hourly_average(two, ths, vals);
  CHECK(sym.theta[0] == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(sym.x[0] == doctest::Approx(2.0));

  // The defining wrap-aware case: {0.1, 2pi - 0.1} averages to 0, not pi.
  const std::vector<double> wrap_pair{0.1, kTwoPi - 0.1};
  const auto wrapped = hourly_average(two, wrap_pair, vals);
  CHECK(wrapped.theta[0] == doctest::Approx(0.0).epsilon(1e-12));

  // Hours without observations are omitted.
  const std::vector<std::int64_t> gap{0, 7200};
  const std::vector<double> a{0.3, 0.4}, b{1.0, 2.0};
  const auto gapped = hourly_average(gap, a, b);
  CHECK(gapped.x.size() == 2);

  const std::vector<std::int64_t> unsorted{100, 50};
  CHECK_THROWS_AS(hourly_average(unsorted, a, b), DataError);
}

TEST_CASE("flag_detection_limit") {
  const std::vector<double> vals{2.9, 3.0, 3.1};
  const auto mask = flag_detection_limit(vals, 3.0);
  REQUIRE(mask.size() == 3);
  CHECK(mask[0] == 1);
  CHECK(mask[1] == 1);
  CHECK(mask[2] == 0);

  CHECK(flag_detection_limit({}, 3.0).empty());

  const std::vector<double> high{10.0, 11.0};
  const auto none = flag_detection_limit(high, 3.0);
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
}
