#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/mc_study.hpp"
#include "cyldens/normal.hpp"
#include "cyldens/simulate.hpp"

using namespace cyldens;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Independent 2-D Simpson oracle at doubled resolution.
double ise_oracle(const JointDensity& a, const JointDensity& b, double x0, double x1,
                  int n) {
  const double ht = kTwoPi / n, hx = (x1 - x0) / n;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double wt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double t = ht * i;
    for (int j = 0; j <= n; ++j) {
      const double wx = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      const double x = x0 + hx * j;
      const double d = a.eval(t, x) - b.eval(t, x);
      total += wt * wx * d * d;
    }
  }
  return total * ht * hx / 9.0;
}

} // namespace

TEST_CASE("ise of a model against itself is zero") {
  const JointDensity ex1 = make_example_density(1);
  CHECK(ise(ex1, ex1, StudyGrid{}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ise matches an independent quadrature oracle") {
  const JointDensity ex1 = make_example_density(1);
  const JointDensity indep(ex1.circular_ptr(), ex1.linear_ptr(),
                           std::make_shared<IndependenceCopula>(), Variant::analytic);
  StudyGrid grid;
  const double got = ise(indep, ex1, grid);
  const double lo = ex1.linear().quantile(1e-4) - 1.0;
  const double hi = ex1.linear().quantile(1.0 - 1e-4) + 1.0;
  const double oracle = ise_oracle(indep, ex1, lo, hi, 200);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("ise is stable under grid refinement") {
  const JointDensity truth = make_example_density(1);
  const CylindricalSample s = simulate({truth, 300, 5});
  const JointDensity fit = fit_joint(s, Variant::cnp);
  StudyGrid coarse;
  StudyGrid fine;
  fine.n_theta = 200;
  fine.n_x = 200;
  const double e1 = ise(fit, truth, coarse);
  const double e2 = ise(fit, truth, fine);
  CHECK(std::abs(e1 - e2) < 0.01 * e2);
}

TEST_CASE("run_study is reproducible and self-consistent") {
  StudyConfig cfg;
  cfg.example_id = 1;
  cfg.sizes = {60};
  cfg.replicates = 8;
  cfg.variants = {Variant::jwp, Variant::jwsp};
  cfg.master_seed = 77;
  const StudyReport a = run_study(cfg);
  const StudyReport b = run_study(cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].ise == b.trace[i].ise);
    CHECK(a.trace[i].seed == b.trace[i].seed);
  }

  // mise equals the mean of the trace to full precision.
  for (const auto& agg : a.aggregates) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : a.trace) {
      if (t.variant == agg.variant && t.n == agg.n) {
        sum += t.ise;
        ++count;
      }
    }
    CHECK(count == agg.successes);
    CHECK(agg.mise == doctest::Approx(sum / count).epsilon(1e-12));
    CHECK(agg.mise >= 0.0);
  }

  // Replicate seeds follow the xor convention.
  for (const auto& t : a.trace) CHECK(t.seed == (cfg.master_seed ^ t.replicate));
}

TEST_CASE("run_study excludes failed replicates and aborts beyond 2%") {
  StudyConfig cfg;
  cfg.example_id = 1;
  cfg.sizes = {40};
  cfg.replicates = 100;
  cfg.variants = {Variant::jwp};
  cfg.master_seed = 3;
  cfg.threads = 1; // sequential, so the call index identifies the replicate

  // One percent failures: recorded and excluded.
  int call = 0;
  const auto flaky = [&call](const CylindricalSample& s, Variant v) {
    if (call++ == 4) throw FitError("synthetic failure");
    return fit_joint(s, v);
  };
  const StudyReport rep = run_study(cfg, flaky);
  const auto& agg = rep.aggregates.at(0);
  CHECK(agg.failures == rep.failure_log.size());
  CHECK(agg.failures + agg.successes == cfg.replicates);
  CHECK(agg.failures > 0);

  // Mass failure aborts the study.
  const auto broken = [](const CylindricalSample&, Variant) -> JointDensity {
    throw FitError("always fails");
  };
  CHECK_THROWS_AS(run_study(cfg, broken), FitError);
}

TEST_CASE("relative efficiency against the parametric baseline") {
  StudyConfig cfg;
  cfg.example_id = 1;
  cfg.sizes = {60, 120};
  cfg.replicates = 6;
  cfg.variants = {Variant::jwp, Variant::jwsp};
  cfg.master_seed = 15;
  const StudyReport rep = run_study(cfg);
  const auto table = relative_efficiency(rep, Variant::jwp);
  for (const auto& row : table) {
    if (row.variant == Variant::jwp) CHECK(row.efficiency == doctest::Approx(1.0));
    if (row.variant == Variant::jwsp) CHECK(row.efficiency <= 1.0 + 1e-9);
  }
  CHECK_THROWS_AS(relative_efficiency(rep, Variant::cnp), std::invalid_argument);
}

TEST_CASE("report files are byte-identical across runs") {
  namespace fs = std::filesystem;
  StudyConfig cfg;
  cfg.example_id = 3;
  cfg.sizes = {50};
  cfg.replicates = 5;
  cfg.variants = {Variant::jwp, Variant::csp};
  cfg.master_seed = 9;
  const fs::path dir = fs::temp_directory_path() / "cyldens_mc_test";
  fs::create_directories(dir);
  for (int run = 0; run < 2; ++run) {
    const StudyReport rep = run_study(cfg);
    write_trace_csv(rep, (dir / ("trace" + std::to_string(run) + ".csv")).string());
    write_summary_csv(rep, (dir / ("summary" + std::to_string(run) + ".csv")).string());
  }
  CHECK(slurp((dir / "trace0.csv").string()) == slurp((dir / "trace1.csv").string()));
  CHECK(slurp((dir / "summary0.csv").string()) ==
        slurp((dir / "summary1.csv").string()));
  const std::string trace = slurp((dir / "trace0.csv").string());
  CHECK(trace.rfind("example_id,variant,n,replicate,ise,seed\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("JWP error shrinks with sample size on the first example") {
  StudyConfig cfg;
  cfg.example_id = 1;
  cfg.sizes = {50, 100, 500};
  cfg.replicates = 100;
  cfg.variants = {Variant::jwp};
  cfg.master_seed = 2468;
  const StudyReport rep = run_study(cfg);
  const double m50 = rep.mise(Variant::jwp, 50);
  const double m100 = rep.mise(Variant::jwp, 100);
  const double m500 = rep.mise(Variant::jwp, 500);
  CHECK(m50 > m100);
  CHECK(m100 > m500);
}

TEST_CASE("copula variants beat the misspecified joining fits on QS data") {
  StudyConfig cfg;
  cfg.example_id = 3;
  cfg.sizes = {500};
  cfg.replicates = 12;
  cfg.variants = {Variant::jwsp, Variant::cnp};
  cfg.master_seed = 31;
  const StudyReport rep = run_study(cfg);
  std::vector<double> jwsp, cnp;
  for (const auto& t : rep.trace) {
    (t.variant == Variant::jwsp ? jwsp : cnp).push_back(t.ise);
  }
  std::sort(jwsp.begin(), jwsp.end());
  std::sort(cnp.begin(), cnp.end());
  CHECK(cnp[cnp.size() / 2] < jwsp[jwsp.size() / 2]);
}

TEST_CASE("study configuration validation") {
  StudyConfig cfg;
  cfg.replicates = 0;
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  cfg.replicates = 1;
  cfg.variants.clear();
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  cfg = StudyConfig{};
  cfg.grid.n_theta = 8;
  cfg.replicates = 1;
  cfg.sizes = {40};
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  cfg = StudyConfig{};
  cfg.example_id = 9;
  cfg.replicates = 1;
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
}
