#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyldens/joint_density.hpp"

namespace cyldens {

//! Integration grid on the truncated cylinder: composite-Simpson interval
//! counts per axis (>= 32, forced even) and the linear-axis window. When the
//! window is omitted it is taken from the truth's linear marginal quantiles
//! at 1e-4 and 1 - 1e-4, widened by one standard deviation.
struct StudyGrid {
  std::size_t n_theta = 100;
  std::size_t n_x = 100;
  std::optional<std::pair<double, double>> x_range;
};

struct StudyConfig {
  int example_id = 1;
  std::optional<ExampleParams> params; // defaults of the example when unset
  std::vector<std::size_t> sizes{50, 100, 500, 1000};
  std::size_t replicates = 200;
  std::vector<Variant> variants{Variant::jwp, Variant::jwsp, Variant::jwnp,
                                Variant::csp, Variant::cnp};
  StudyGrid grid;
  std::uint64_t master_seed = 1;
  std::size_t threads = 0; // 0: CYLDENS_THREADS or hardware concurrency
};

struct ReplicateRecord {
  Variant variant;
  std::size_t n;
  std::size_t replicate;
  double ise;
  std::uint64_t seed;
};

struct StudyReport {
  struct Aggregate {
    Variant variant;
    std::size_t n;
    double mise;
    std::size_t successes;
    std::size_t failures;
    double seconds; // wall time spent fitting and scoring this cell
  };
  struct Failure {
    Variant variant;
    std::size_t n;
    std::size_t replicate;
    std::string message;
  };

  StudyConfig config;
  std::string generator_id;
  std::pair<double, double> x_range{0.0, 0.0};
  std::vector<ReplicateRecord> trace; // successes, deterministic order
  std::vector<Aggregate> aggregates;
  std::vector<Failure> failure_log;

  double mise(Variant v, std::size_t n) const;
};

//! Integrated squared error between two joint models by two-dimensional
//! composite Simpson over [0, 2pi] x x_range. Throws NumericError (with the
//! offending grid coordinates) on non-finite evaluations.
double ise(const JointDensity& estimate, const JointDensity& truth,
           const StudyGrid& grid);

//! Monte Carlo study: per replicate, simulate from the example truth, fit
//! every requested variant and accumulate ISE. Replicates run concurrently;
//! aggregation is an ordered reduction so the report is identical regardless
//! of the thread schedule. Replicate r uses seed master_seed xor r. Failed
//! fits are excluded and counted; more than 2% failures in any cell aborts.
StudyReport run_study(const StudyConfig& config);

//! Seam for testing the bookkeeping: a custom fitter in place of fit_joint.
using FitFunction =
    std::function<JointDensity(const CylindricalSample&, Variant)>;
StudyReport run_study(const StudyConfig& config, const FitFunction& fit);

//! Efficiency of each variant relative to a baseline:
//! MISE(baseline) / MISE(variant) per (variant, n).
struct EfficiencyRow {
  Variant variant;
  std::size_t n;
  double efficiency;
};
std::vector<EfficiencyRow> relative_efficiency(const StudyReport& report,
                                               Variant baseline);

//! Report serialization. The trace CSV has one row per success
//! (example_id,variant,n,replicate,ise,seed); the summary CSV one row per
//! cell (variant,n,mise,rel_eff with rel_eff against JWP when present).
//! Runtime statistics and failure details go to the meta file, which is the
//! only output that is not byte-reproducible across machines.
void write_trace_csv(const StudyReport& report, const std::string& path);
void write_summary_csv(const StudyReport& report, const std::string& path);
void write_meta(const StudyReport& report, const std::string& path);

} // namespace cyldens
