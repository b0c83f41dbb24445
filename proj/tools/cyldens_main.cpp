// Command-line front end: data preparation, joint-density fitting, cylinder
// simulation and Monte Carlo error studies over CSV files.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyldens/boxcox.hpp"
#include "cyldens/csv.hpp"
#include "cyldens/data_prep.hpp"
#include "cyldens/errors.hpp"
#include "cyldens/joint_density.hpp"
#include "cyldens/math_util.hpp"
#include "cyldens/mc_study.hpp"
#include "cyldens/simulate.hpp"

using namespace cyldens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Dataset {
  std::vector<std::int64_t> timestamps; // empty when the column is absent
  std::vector<double> theta;
  std::vector<double> x;
  std::vector<char> at_limit;
  bool has_time = false;
};

Dataset load_dataset(const std::string& path, bool degrees,
                     std::optional<double> limit) {
  const CsvTable table = read_csv(path);
  const auto theta_col = table.column("theta");
  const auto x_col = table.column("x");
  if (!theta_col || !x_col) {
    throw DataError(path + ": need 'theta' and 'x' columns");
  }
  const auto time_col = table.column("timestamp");

  Dataset data;
  data.has_time = time_col.has_value();
  std::vector<std::string> bad;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.line_numbers[r]);
    if (row.size() < table.header.size()) {
      bad.push_back("line " + line + ": too few fields");
      continue;
    }
    const auto theta = parse_double(row[*theta_col]);
    if (!theta || !std::isfinite(*theta)) {
      bad.push_back("line " + line + ": bad theta '" + row[*theta_col] + "'");
      continue;
    }
    auto x = parse_double(row[*x_col]);
    if (!x && limit && row[*x_col].empty()) {
      x = *limit; // recorded at the detection limit
    }
    if (!x || !std::isfinite(*x)) {
      bad.push_back("line " + line + ": bad x '" + row[*x_col] + "'");
      continue;
    }
    std::int64_t t = 0;
    if (data.has_time) {
      const auto parsed = parse_iso8601(row[*time_col]);
      if (!parsed) {
        bad.push_back("line " + line + ": bad timestamp '" + row[*time_col] + "'");
        continue;
      }
      t = *parsed;
    }
    if (data.has_time) data.timestamps.push_back(t);
    data.theta.push_back(wrap_angle(degrees ? *theta * kPi / 180.0 : *theta));
    data.x.push_back(*x);
  }
  const std::size_t total = table.rows.size();
  if (!bad.empty()) {
    for (const auto& msg : bad) std::cerr << path << ": " << msg << "\n";
  }
  if (total == 0 || bad.size() * 20 > total) { // more than 5% unusable
    throw DataError(path + ": " + std::to_string(bad.size()) + " of " +
                    std::to_string(total) + " rows unusable");
  }
  return data;
}

void write_dataset(const std::string& path, const Dataset& data, bool with_flags) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << (data.has_time ? "timestamp," : "") << "theta,x"
      << (with_flags ? ",at_limit\n" : "\n");
  for (std::size_t i = 0; i < data.theta.size(); ++i) {
    if (data.has_time) out << format_iso8601(data.timestamps[i]) << ',';
    out << format_double(data.theta[i]) << ',' << format_double(data.x[i]);
    if (with_flags) out << ',' << (data.at_limit.empty() ? 0 : int(data.at_limit[i]));
    out << '\n';
  }
}

// --- prep ------------------------------------------------------------------

struct PrepArgs {
  std::string input, output;
  bool degrees = false;
  bool hourly = false;
  bool perturb = false;
  std::optional<double> limit;
  std::optional<double> boxcox_lambda;
  std::uint64_t seed = 0;
};

int cmd_prep(const PrepArgs& args) {
  Dataset data = load_dataset(args.input, args.degrees, args.limit);
  const std::size_t rows_in = data.theta.size();

  if (args.hourly) {
    if (!data.has_time) {
      throw DataError("--hourly requires a timestamp column");
    }
    const HourlyAverages hourly =
        hourly_average(data.timestamps, data.theta, data.x);
    data.timestamps = hourly.hour_start;
    data.theta = hourly.theta;
    data.x = hourly.x;
  }
  if (args.limit) {
    data.at_limit = flag_detection_limit(data.x, *args.limit);
  }
  if (args.perturb) {
    PerturbationSpec spec;
    spec.seed = args.seed;
    data.x = perturb_linear(data.x, spec);
    data.theta = perturb_circular(data.theta, spec);
  }
  if (args.boxcox_lambda) {
    const BoxCoxParams p{*args.boxcox_lambda};
    for (auto& v : data.x) v = boxcox(v, p);
  }

  write_dataset(args.output, data, args.limit.has_value());

  std::ofstream prov(args.output + ".prov.txt", std::ios::binary);
  prov << "# provenance: cyldens prep\n";
  prov << "input=" << args.input << '\n';
  prov << "rows_in=" << rows_in << '\n';
  prov << "rows_out=" << data.theta.size() << '\n';
  prov << "degrees=" << args.degrees << '\n';
  prov << "hourly=" << args.hourly << '\n';
  if (args.limit) prov << "limit=" << format_double(*args.limit) << '\n';
  prov << "perturb=" << args.perturb << '\n';
  if (args.perturb) prov << "seed=" << args.seed << '\n';
  if (args.boxcox_lambda) {
    prov << "boxcox_lambda=" << format_double(*args.boxcox_lambda) << '\n';
  }
  std::cout << args.output << ": " << data.theta.size() << " rows\n";
  return kExitOk;
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string variant = "cnp";
  std::string grid = "100x100";
  std::string output = "density_grid.csv";
  std::string summary = "fit_summary.txt";
  bool degrees = false;
  std::vector<std::string> bandwidths; // key=value: nu, h, joining_nu, bdiag, boff
  std::optional<double> xmin, xmax;
};

FitOptions parse_bandwidths(const std::vector<std::string>& kvs) {
  FitOptions options;
  std::optional<double> bdiag, boff;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    const auto value = eq == std::string::npos
                           ? std::nullopt
                           : parse_double(kv.substr(eq + 1));
    if (!value) {
      throw CLI::ValidationError("--bandwidth", "expected key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    if (key == "nu") options.circular_bandwidth = *value;
    else if (key == "h") options.linear_bandwidth = *value;
    else if (key == "joining_nu") options.joining_bandwidth = *value;
    else if (key == "bdiag") bdiag = *value;
    else if (key == "boff") boff = *value;
    else throw CLI::ValidationError("--bandwidth", "unknown key '" + key + "'");
  }
  if (bdiag) options.copula_bandwidth = BandwidthMatrix{*bdiag, boff.value_or(0.0)};
  else if (boff) {
    throw CLI::ValidationError("--bandwidth", "boff requires bdiag");
  }
  return options;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& spec) {
  const auto xpos = spec.find('x');
  if (xpos == std::string::npos) throw CLI::ValidationError("--grid", "expected NxM");
  const auto a = parse_int(spec.substr(0, xpos));
  const auto b = parse_int(spec.substr(xpos + 1));
  if (!a || !b || *a < 2 || *b < 2) {
    throw CLI::ValidationError("--grid", "expected NxM with N, M >= 2");
  }
  return {static_cast<std::size_t>(*a), static_cast<std::size_t>(*b)};
}

int cmd_fit(const FitArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_dataset(args.input, args.degrees, std::nullopt);
  CylindricalSample sample{data.theta, data.x};

  const FitOptions options = parse_bandwidths(args.bandwidths);

  FitSummary summary;
  const Variant variant = parse_variant(args.variant);
  const JointDensity model = fit_joint(sample, variant, options, &summary);
  if (summary.sj_fallback) {
    std::cerr << "warning: Sheather-Jones fixed point not bracketed; "
                 "Silverman bandwidth used for the linear marginal\n";
  }

  const auto [n_theta, n_x] = parse_grid(args.grid);
  std::vector<double> thetas(n_theta), xs(n_x);
  for (std::size_t i = 0; i < n_theta; ++i) {
    thetas[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n_theta);
  }
  const double sd = model.linear().scale();
  const double lo = args.xmin ? *args.xmin : model.linear().quantile(1e-4) - sd;
  const double hi = args.xmax ? *args.xmax : model.linear().quantile(1.0 - 1e-4) + sd;
  for (std::size_t j = 0; j < n_x; ++j) {
    xs[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n_x - 1);
  }
  const std::vector<double> grid = model.eval_grid(thetas, xs);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw DataError("cannot write " + args.output);
  out << "theta,x,density\n";
  for (std::size_t i = 0; i < n_theta; ++i) {
    for (std::size_t j = 0; j < n_x; ++j) {
      out << format_double(thetas[i]) << ',' << format_double(xs[j]) << ','
          << format_double(grid[i * n_x + j]) << '\n';
    }
  }

  std::ofstream sum(args.summary, std::ios::binary);
  if (!sum) throw DataError("cannot write " + args.summary);
  sum << "# cyldens fit summary\n";
  sum << "input=" << args.input << '\n';
  sum << "variant=" << variant_name(variant) << '\n';
  sum << "n=" << sample.size() << '\n';
  sum << "grid=" << n_theta << 'x' << n_x << '\n';
  sum << "x_min=" << format_double(lo) << '\n';
  sum << "x_max=" << format_double(hi) << '\n';
  if (summary.circular_params) {
    sum << "circular_mu=" << format_double(summary.circular_params->mu) << '\n';
    sum << "circular_kappa=" << format_double(summary.circular_params->kappa) << '\n';
  }
  if (summary.linear_params) {
    sum << "linear_mean=" << format_double(summary.linear_params->mean) << '\n';
    sum << "linear_sd=" << format_double(summary.linear_params->sd) << '\n';
  }
  if (summary.joining_params) {
    sum << "joining_mu=" << format_double(summary.joining_params->mu) << '\n';
    sum << "joining_kappa=" << format_double(summary.joining_params->kappa) << '\n';
  }
  if (summary.circular_bandwidth) {
    sum << "nu=" << format_double(*summary.circular_bandwidth) << '\n';
  }
  if (summary.linear_bandwidth) {
    sum << "h=" << format_double(*summary.linear_bandwidth) << '\n';
  }
  if (summary.joining_bandwidth) {
    sum << "joining_nu=" << format_double(*summary.joining_bandwidth) << '\n';
  }
  if (summary.copula_bandwidth) {
    sum << "copula_bdiag=" << format_double(summary.copula_bandwidth->diag) << '\n';
    sum << "copula_boff=" << format_double(summary.copula_bandwidth->off) << '\n';
  }
  if (summary.sj_fallback) {
    sum << "note=Sheather-Jones bracket failed, Silverman fallback used\n";
  }
  sum << "runtime_seconds=" << format_double(seconds) << '\n';

  std::cout << args.output << ": " << n_theta << "x" << n_x << " grid, "
            << variant_name(variant) << " fit in " << seconds << " s\n";
  return kExitOk;
}

// --- simulate ----------------------------------------------------------------

struct SimArgs {
  int example = 1;
  std::vector<std::string> params;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string output = "sample.csv";
};

ExampleParams apply_param_overrides(int example,
                                    const std::vector<std::string>& kvs) {
  ExampleParams p = default_example_params(example);
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const auto value = parse_double(kv.substr(eq + 1));
    if (!value) {
      throw CLI::ValidationError("--param", "bad numeric value in '" + kv + "'");
    }
    if (key == "join_mu") p.join_mu = *value;
    else if (key == "join_kappa") p.join_kappa = *value;
    else if (key == "circ_mu") p.circ_mu = *value;
    else if (key == "circ_kappa") p.circ_kappa = *value;
    else if (key == "alpha") p.alpha = *value;
    else if (key == "lin_mean") p.lin_mean = *value;
    else if (key == "lin_sd") p.lin_sd = *value;
    else throw CLI::ValidationError("--param", "unknown key '" + key + "'");
  }
  return p;
}

int cmd_simulate(const SimArgs& args) {
  const ExampleParams params = apply_param_overrides(args.example, args.params);
  const JointDensity model = make_example_density(args.example, params);
  const CylindricalSample sample = simulate({model, args.n, args.seed});
  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw DataError("cannot write " + args.output);
  out << "theta,x\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << format_double(sample.theta[i]) << ',' << format_double(sample.x[i])
        << '\n';
  }
  std::ofstream prov(args.output + ".prov.txt", std::ios::binary);
  prov << "# provenance: cyldens simulate\n";
  prov << "example=" << args.example << '\n';
  for (const auto& kv : args.params) prov << "param." << kv << '\n';
  prov << "n=" << args.n << '\n';
  prov << "seed=" << args.seed << '\n';
  std::cout << args.output << ": " << sample.size() << " draws\n";
  return kExitOk;
}

// --- study -------------------------------------------------------------------

struct IniFile {
  std::map<std::string, std::string> values; // section.key -> value
};

IniFile read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  IniFile ini;
  std::string line, section;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("config", "expected key=value, got '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b2 = s.find_first_not_of(" \t");
      const auto e2 = s.find_last_not_of(" \t");
      s = (b2 == std::string::npos) ? "" : s.substr(b2, e2 - b2 + 1);
    };
    trim(key);
    trim(value);
    ini.values[section.empty() ? key : section + "." + key] = value;
  }
  return ini;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item =
        s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

StudyConfig parse_study_config(const IniFile& ini) {
  StudyConfig cfg;
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = ini.values.find(key);
    if (it == ini.values.end()) return std::nullopt;
    return it->second;
  };
  const auto require_int = [&](const std::string& key, auto& target) {
    if (const auto v = get(key)) {
      const auto parsed = parse_int(*v);
      if (!parsed) throw CLI::ValidationError("config", "bad integer for " + key);
      target = static_cast<std::decay_t<decltype(target)>>(*parsed);
    }
  };
  require_int("study.example", cfg.example_id);
  require_int("study.replicates", cfg.replicates);
  require_int("study.seed", cfg.master_seed);
  require_int("study.threads", cfg.threads);
  require_int("grid.theta", cfg.grid.n_theta);
  require_int("grid.x", cfg.grid.n_x);
  if (const auto v = get("study.sizes")) {
    cfg.sizes.clear();
    for (const auto& item : split_list(*v)) {
      const auto parsed = parse_int(item);
      if (!parsed || *parsed < 1) {
        throw CLI::ValidationError("config", "bad entry in study.sizes: " + item);
      }
      cfg.sizes.push_back(static_cast<std::size_t>(*parsed));
    }
  }
  if (const auto v = get("study.variants")) {
    cfg.variants.clear();
    for (const auto& item : split_list(*v)) {
      try {
        cfg.variants.push_back(parse_variant(item));
      } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("config", "bad entry in study.variants: " + item);
      }
    }
  }
  const auto xmin = get("grid.x_min");
  const auto xmax = get("grid.x_max");
  if (xmin.has_value() != xmax.has_value()) {
    throw CLI::ValidationError("config", "grid.x_min and grid.x_max come together");
  }
  if (xmin) {
    const auto a = parse_double(*xmin), b = parse_double(*xmax);
    if (!a || !b || !(*a < *b)) {
      throw CLI::ValidationError("config", "bad grid.x_min/grid.x_max");
    }
    cfg.grid.x_range = {{*a, *b}};
  }
  bool have_params = false;
  ExampleParams params = default_example_params(cfg.example_id);
  const auto param = [&](const std::string& key, double& target) {
    if (const auto v = get("params." + key)) {
      const auto parsed = parse_double(*v);
      if (!parsed) throw CLI::ValidationError("config", "bad value for params." + key);
      target = *parsed;
      have_params = true;
    }
  };
  param("join_mu", params.join_mu);
  param("join_kappa", params.join_kappa);
  param("circ_mu", params.circ_mu);
  param("circ_kappa", params.circ_kappa);
  param("alpha", params.alpha);
  param("lin_mean", params.lin_mean);
  param("lin_sd", params.lin_sd);
  if (have_params) cfg.params = params;

  for (const auto& [key, value] : ini.values) {
    static const std::vector<std::string> known{
        "study.example", "study.replicates", "study.seed",   "study.threads",
        "study.sizes",   "study.variants",   "grid.theta",   "grid.x",
        "grid.x_min",    "grid.x_max",       "output.trace", "output.summary",
        "output.meta"};
    const bool is_param = key.rfind("params.", 0) == 0;
    if (!is_param && std::find(known.begin(), known.end(), key) == known.end()) {
      throw CLI::ValidationError("config", "unknown key '" + key + "'");
    }
  }
  return cfg;
}

int cmd_study(const std::string& config_path, const std::string& prefix,
              std::size_t threads) {
  const IniFile ini = read_ini(config_path);
  StudyConfig cfg = parse_study_config(ini);
  if (threads > 0) cfg.threads = threads;

  const auto name = [&](const std::string& key, const std::string& fallback) {
    const auto it = ini.values.find(key);
    return it != ini.values.end() ? it->second : prefix + fallback;
  };
  const StudyReport report = run_study(cfg);
  const std::string trace_path = name("output.trace", "_trace.csv");
  const std::string summary_path = name("output.summary", "_summary.csv");
  const std::string meta_path = name("output.meta", "_meta.txt");
  write_trace_csv(report, trace_path);
  write_summary_csv(report, summary_path);
  write_meta(report, meta_path);
  std::cout << trace_path << ", " << summary_path << ", " << meta_path << " written\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"circular-linear joint density estimation toolkit"};
  app.require_subcommand(1);

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "preprocess a dataset CSV");
  prep_cmd->add_option("input", prep.input, "input CSV")->required();
  prep_cmd->add_option("-o,--output", prep.output, "output CSV")->required();
  prep_cmd->add_flag("--degrees", prep.degrees, "theta column is in degrees");
  prep_cmd->add_flag("--hourly", prep.hourly, "average within calendar hours");
  prep_cmd->add_option("--limit", prep.limit, "detection limit for x");
  prep_cmd->add_flag("--perturb", prep.perturb, "tie-breaking perturbation");
  prep_cmd->add_option("--boxcox", prep.boxcox_lambda, "Box-Cox lambda for x");
  prep_cmd->add_option("--seed", prep.seed, "perturbation seed");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a joint density and export a grid");
  fit_cmd->add_option("input", fit.input, "input CSV")->required();
  fit_cmd->add_option("--variant", fit.variant, "jwp|jwsp|jwnp|csp|cnp")
      ->check(CLI::IsMember({"jwp", "jwsp", "jwnp", "csp", "cnp"}));
  fit_cmd->add_option("--grid", fit.grid, "theta x value grid, e.g. 100x100");
  fit_cmd->add_flag("--degrees", fit.degrees, "theta column is in degrees");
  fit_cmd->add_option("--bandwidth", fit.bandwidths,
                      "override, key=value with key in "
                      "{nu, h, joining_nu, bdiag, boff}");
  fit_cmd->add_option("--xmin", fit.xmin, "grid lower x bound");
  fit_cmd->add_option("--xmax", fit.xmax, "grid upper x bound");
  fit_cmd->add_option("-o,--output", fit.output, "density grid CSV");
  fit_cmd->add_option("--summary", fit.summary, "fit summary file");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw from a benchmark density");
  sim_cmd->add_option("--example", sim.example, "example id 1..4")
      ->check(CLI::Range(1, 4))
      ->required();
  sim_cmd->add_option("--param", sim.params, "parameter override key=value");
  sim_cmd->add_option("--n", sim.n, "sample size")->required();
  sim_cmd->add_option("--seed", sim.seed, "generator seed");
  sim_cmd->add_option("-o,--output", sim.output, "output CSV");

  std::string study_config, study_prefix = "study";
  std::size_t study_threads = 0;
  auto* study_cmd = app.add_subcommand("study", "run a Monte Carlo error study");
  study_cmd->add_option("--config", study_config, "study configuration file")
      ->required();
  study_cmd->add_option("-o,--prefix", study_prefix, "output file prefix");
  study_cmd->add_option("--threads", study_threads, "worker thread count");

  try {
    app.parse(argc, argv);
    if (prep_cmd->parsed()) return cmd_prep(prep);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (study_cmd->parsed()) return cmd_study(study_config, study_prefix, study_threads);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
