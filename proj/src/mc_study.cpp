#include "cyldens/mc_study.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cyldens/csv.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/parallel.hpp"
#include "cyldens/rng.hpp"
#include "cyldens/simulate.hpp"

namespace cyldens {

namespace {

struct IntegrationMesh {
  std::vector<double> thetas, xs;   // Simpson nodes
  std::vector<double> w_theta, w_x; // Simpson weights
};

std::size_t force_even(std::size_t n) { return n % 2 == 0 ? n : n + 1; }

std::pair<double, double> resolve_x_range(const JointDensity& truth,
                                          const StudyGrid& grid) {
  if (grid.x_range) return *grid.x_range;
  const double sd = truth.linear().scale();
  const double lo = truth.linear().quantile(1e-4) - sd;
  const double hi = truth.linear().quantile(1.0 - 1e-4) + sd;
  return {lo, hi};
}

IntegrationMesh make_mesh(const StudyGrid& grid, std::pair<double, double> x_range) {
  if (grid.n_theta < 32 || grid.n_x < 32) {
    throw std::invalid_argument("StudyGrid: interval counts must be >= 32");
  }
  IntegrationMesh mesh;
  const std::size_t nt = force_even(grid.n_theta);
  const std::size_t nx = force_even(grid.n_x);
  const double ht = kTwoPi / static_cast<double>(nt);
  const double hx = (x_range.second - x_range.first) / static_cast<double>(nx);
  mesh.thetas.resize(nt + 1);
  for (std::size_t i = 0; i <= nt; ++i) mesh.thetas[i] = ht * static_cast<double>(i);
  mesh.thetas.back() = kTwoPi;
  mesh.xs.resize(nx + 1);
  for (std::size_t j = 0; j <= nx; ++j) {
    mesh.xs[j] = x_range.first + hx * static_cast<double>(j);
  }
  mesh.w_theta = simpson_weights(nt, ht);
  mesh.w_x = simpson_weights(nx, hx);
  return mesh;
}

double ise_against_cached(const JointDensity& estimate, const IntegrationMesh& mesh,
                          const std::vector<double>& truth_values) {
  const std::vector<double> est = estimate.eval_grid(mesh.thetas, mesh.xs);
  const std::size_t nx = mesh.xs.size();
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.thetas.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      const double d = est[i * nx + j] - truth_values[i * nx + j];
      if (!std::isfinite(d)) {
        throw NumericError("ise: non-finite density at theta=" +
                           format_double(mesh.thetas[i]) + ", x=" +
                           format_double(mesh.xs[j]));
      }
      row += mesh.w_x[j] * d * d;
    }
    total += mesh.w_theta[i] * row;
  }
  return total;
}

} // namespace

double ise(const JointDensity& estimate, const JointDensity& truth,
           const StudyGrid& grid) {
  const IntegrationMesh mesh = make_mesh(grid, resolve_x_range(truth, grid));
  const std::vector<double> truth_values = truth.eval_grid(mesh.thetas, mesh.xs);
  return ise_against_cached(estimate, mesh, truth_values);
}

double StudyReport::mise(Variant v, std::size_t n) const {
  for (const auto& a : aggregates) {
    if (a.variant == v && a.n == n) return a.mise;
  }
  throw std::invalid_argument("StudyReport::mise: no such cell");
}

StudyReport run_study(const StudyConfig& config) {
  return run_study(config, [](const CylindricalSample& sample, Variant v) {
    return fit_joint(sample, v);
  });
}

StudyReport run_study(const StudyConfig& config, const FitFunction& fit) {
  if (config.replicates < 1) {
    throw std::invalid_argument("StudyConfig: replicates must be >= 1");
  }
  if (config.variants.empty()) {
    throw std::invalid_argument("StudyConfig: no variants requested");
  }
  if (config.sizes.empty()) {
    throw std::invalid_argument("StudyConfig: no sample sizes requested");
  }
  const ExampleParams params =
      config.params ? *config.params : default_example_params(config.example_id);
  const JointDensity truth = make_example_density(config.example_id, params);

  StudyReport report;
  report.config = config;
  report.generator_id = Rng::algorithm_id();
  report.x_range = resolve_x_range(truth, config.grid);
  const IntegrationMesh mesh = make_mesh(config.grid, report.x_range);
  const std::vector<double> truth_values = truth.eval_grid(mesh.thetas, mesh.xs);

  const std::size_t n_variants = config.variants.size();
  for (std::size_t n : config.sizes) {
    struct Slot {
      std::vector<double> ise;        // per variant, NaN on failure
      std::vector<std::string> error; // per variant
      std::vector<double> seconds;
      std::uint64_t seed = 0;
    };
    std::vector<Slot> slots(config.replicates);

    parallel_for(
        config.replicates,
        [&](std::size_t r) {
          Slot& slot = slots[r];
          slot.ise.assign(n_variants, std::numeric_limits<double>::quiet_NaN());
          slot.error.assign(n_variants, {});
          slot.seconds.assign(n_variants, 0.0);
          slot.seed = config.master_seed ^ static_cast<std::uint64_t>(r);
          const CylindricalSample sample = simulate({truth, n, slot.seed});
          for (std::size_t k = 0; k < n_variants; ++k) {
            const auto start = std::chrono::steady_clock::now();
            try {
              const JointDensity model = fit(sample, config.variants[k]);
              slot.ise[k] = ise_against_cached(model, mesh, truth_values);
            } catch (const std::exception& e) {
              slot.error[k] = e.what();
            }
            slot.seconds[k] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
          }
        },
        config.threads);

    // Ordered reduction by replicate index: output is schedule independent.
    for (std::size_t k = 0; k < n_variants; ++k) {
      StudyReport::Aggregate agg{config.variants[k], n, 0.0, 0, 0, 0.0};
      double sum = 0.0;
      for (std::size_t r = 0; r < config.replicates; ++r) {
        const Slot& slot = slots[r];
        agg.seconds += slot.seconds[k];
        if (std::isfinite(slot.ise[k])) {
          sum += slot.ise[k];
          ++agg.successes;
          report.trace.push_back(
              {config.variants[k], n, r, slot.ise[k], slot.seed});
        } else {
          ++agg.failures;
          report.failure_log.push_back({config.variants[k], n, r, slot.error[k]});
        }
      }
      if (agg.failures * 50 > config.replicates) { // more than 2%
        throw FitError(std::string("run_study: variant ") +
                       variant_name(config.variants[k]) + " failed on " +
                       std::to_string(agg.failures) + "/" +
                       std::to_string(config.replicates) +
                       " replicates at n=" + std::to_string(n));
      }
      if (agg.successes == 0) {
        throw FitError("run_study: no successful replicates");
      }
      agg.mise = sum / static_cast<double>(agg.successes);
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

std::vector<EfficiencyRow> relative_efficiency(const StudyReport& report,
                                               Variant baseline) {
  bool have_baseline = false;
  for (const auto& a : report.aggregates) {
    if (a.variant == baseline) have_baseline = true;
  }
  if (!have_baseline) {
    throw std::invalid_argument("relative_efficiency: baseline variant not in report");
  }
  std::vector<EfficiencyRow> rows;
  for (const auto& a : report.aggregates) {
    rows.push_back({a.variant, a.n, report.mise(baseline, a.n) / a.mise});
  }
  return rows;
}

void write_trace_csv(const StudyReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "example_id,variant,n,replicate,ise,seed\n";
  for (const auto& rec : report.trace) {
    out << report.config.example_id << ',' << variant_name(rec.variant) << ','
        << rec.n << ',' << rec.replicate << ',' << format_double(rec.ise) << ','
        << rec.seed << '\n';
  }
}

void write_summary_csv(const StudyReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bool have_jwp = false;
  for (const auto& a : report.aggregates) {
    if (a.variant == Variant::jwp) have_jwp = true;
  }
  out << "variant,n,mise,rel_eff\n";
  for (const auto& a : report.aggregates) {
    out << variant_name(a.variant) << ',' << a.n << ',' << format_double(a.mise)
        << ',';
    if (have_jwp) out << format_double(report.mise(Variant::jwp, a.n) / a.mise);
    out << '\n';
  }
}

void write_meta(const StudyReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "# study provenance\n";
  out << "generator=" << report.generator_id << '\n';
  out << "master_seed=" << report.config.master_seed << '\n';
  out << "example_id=" << report.config.example_id << '\n';
  out << "replicates=" << report.config.replicates << '\n';
  out << "grid_theta=" << report.config.grid.n_theta << '\n';
  out << "grid_x=" << report.config.grid.n_x << '\n';
  out << "x_min=" << format_double(report.x_range.first) << '\n';
  out << "x_max=" << format_double(report.x_range.second) << '\n';
  for (const auto& a : report.aggregates) {
    out << "cell." << variant_name(a.variant) << '.' << a.n
        << ".seconds=" << format_double(a.seconds) << '\n';
    out << "cell." << variant_name(a.variant) << '.' << a.n
        << ".failures=" << a.failures << '\n';
  }
  for (const auto& f : report.failure_log) {
    out << "# failure " << variant_name(f.variant) << " n=" << f.n
        << " replicate=" << f.replicate << ": " << f.message << '\n';
  }
}

} // namespace cyldens
