#include "conduct/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "conduct/errors.hpp"
#include "conduct/estimation.hpp"
#include "conduct/identlab.hpp"
#include "conduct/serialize.hpp"

namespace conduct::cli {

DgpConfig RunConfig::dgp() const {
  DgpConfig c;
  c.params = params;
  c.sample_size = sample_size;
  c.seed = seed;
  c.shifter_low = shifter_low;
  c.shifter_high = shifter_high;
  c.instrument_noise_sd = instrument_noise_sd;
  return c;
}

ExperimentGrid RunConfig::grid() const {
  ExperimentGrid g;
  g.params = params;
  g.sigmas = sigmas;
  g.sample_sizes = sample_sizes;
  g.n_reps = reps;
  g.master_seed = seed;
  g.shifter_low = shifter_low;
  g.shifter_high = shifter_high;
  g.instrument_noise_sd = instrument_noise_sd;
  return g;
}

void RunConfig::validate() const {
  std::ostringstream bad;
  if (!(shifter_low > 0.0)) bad << "shifter_low (" << shifter_low << ") must be positive; ";
  if (!(shifter_low <= shifter_high)) {
    bad << "shifter_low (" << shifter_low << ") must not exceed shifter_high (" << shifter_high
        << "); ";
  }
  if (!(instrument_noise_sd >= 0.0)) bad << "instrument_noise_sd must be non-negative; ";
  if (sample_size < 1) bad << "sample_size must be at least 1; ";
  if (reps < 1) bad << "reps must be at least 1; ";
  if (format != "csv" && format != "markdown" && format != "json") {
    bad << "format must be csv, markdown or json; ";
  }
  const std::string problems = bad.str();
  if (!problems.empty()) throw DomainError(problems.substr(0, problems.size() - 2));
  params.validate();
  grid().validate();
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::json j = c.params;
  j["sample_size"] = c.sample_size;
  j["seed"] = c.seed;
  j["shifter_low"] = c.shifter_low;
  j["shifter_high"] = c.shifter_high;
  j["instrument_noise_sd"] = c.instrument_noise_sd;
  j["sigmas"] = c.sigmas;
  j["sample_sizes"] = c.sample_sizes;
  j["reps"] = c.reps;
  j["format"] = c.format;
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text, RunConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // what() already carries "line L, column C".
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object");

  nlohmann::json param_keys = nlohmann::json::object();
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha0" || key == "alpha1" || key == "alpha2" || key == "beta0" ||
          key == "beta1" || key == "beta2" || key == "theta" || key == "sigma") {
        param_keys[key] = value;
      } else if (key == "sample_size") {
        base.sample_size = value.get<std::size_t>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "shifter_low") {
        base.shifter_low = value.get<double>();
      } else if (key == "shifter_high") {
        base.shifter_high = value.get<double>();
      } else if (key == "instrument_noise_sd") {
        base.instrument_noise_sd = value.get<double>();
      } else if (key == "sigmas") {
        base.sigmas = value.get<std::vector<double>>();
      } else if (key == "sample_sizes") {
        base.sample_sizes = value.get<std::vector<std::size_t>>();
      } else if (key == "reps") {
        base.reps = value.get<std::size_t>();
      } else if (key == "format") {
        base.format = value.get<std::string>();
      } else if (key == "out") {
        base.out = value.get<std::string>();
      } else {
        throw ParseError("config field '" + key + "': unknown field");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config field '" + key + "': " + e.what());
    }
  }
  try {
    from_json(param_keys, base.params);
  } catch (const ParseError& e) {
    // strip the "params." prefix; the config file is flat
    throw ParseError(std::string("config field ") + (e.what() + 7));
  }
  return base;
}

int workers_from_env() {
  const char* v = std::getenv("CONDUCT_NUM_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  const int n = std::atoi(v);
  return n > 0 ? n : 0;
}

namespace {

struct IoError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to `path`, or to `out` when path is empty or "-".
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw IoError("write to '" + path + "' failed");
}

// Structural-parameter flags shared by every subcommand.
struct ParamFlags {
  double alpha0 = 0, alpha1 = 0, alpha2 = 0, beta0 = 0, beta1 = 0, beta2 = 0, theta = 0, sigma = 0;
  CLI::Option* opts[8]{};

  void attach(CLI::App& app, bool with_sigma) {
    opts[0] = app.add_option("--alpha0", alpha0, "demand elasticity exponent");
    opts[1] = app.add_option("--alpha1", alpha1, "demand shifter 1 exponent");
    opts[2] = app.add_option("--alpha2", alpha2, "demand shifter 2 exponent");
    opts[3] = app.add_option("--beta0", beta0, "cost elasticity exponent");
    opts[4] = app.add_option("--beta1", beta1, "cost shifter 1 exponent");
    opts[5] = app.add_option("--beta2", beta2, "cost shifter 2 exponent");
    opts[6] = app.add_option("--theta", theta, "conduct parameter");
    if (with_sigma) opts[7] = app.add_option("--sigma", sigma, "error standard deviation");
  }

  void apply(StructuralParams& p) const {
    double* slots[] = {&p.alpha0, &p.alpha1, &p.alpha2, &p.beta0,
                       &p.beta1,  &p.beta2,  &p.theta,  &p.sigma};
    const double values[] = {alpha0, alpha1, alpha2, beta0, beta1, beta2, theta, sigma};
    for (int i = 0; i < 8; ++i) {
      if (opts[i] != nullptr && opts[i]->count() > 0) *slots[i] = values[i];
    }
  }
};

struct SharedFlags {
  std::string config_path;
  ParamFlags params;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format;
  double shifter_low = 0, shifter_high = 0, noise_sd = 0;
  CLI::Option *seed_opt = nullptr, *out_opt = nullptr, *format_opt = nullptr;
  CLI::Option *low_opt = nullptr, *high_opt = nullptr, *noise_opt = nullptr;

  void attach(CLI::App& app, bool with_sigma, bool with_format) {
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    params.attach(app, with_sigma);
    seed_opt = app.add_option("--seed", seed, "master seed");
    out_opt = app.add_option("--out", out_path, "output path (default stdout)");
    if (with_format) format_opt = app.add_option("--format", format, "csv | markdown");
    low_opt = app.add_option("--shifter-low", shifter_low, "lower bound of shifter draws");
    high_opt = app.add_option("--shifter-high", shifter_high, "upper bound of shifter draws");
    noise_opt = app.add_option("--instrument-noise-sd", noise_sd, "instrument noise sd");
  }

  // default < file < flag
  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) c = config_from_json(read_file(config_path));
    params.apply(c.params);
    if (seed_opt->count()) c.seed = seed;
    if (out_opt->count()) c.out = out_path;
    if (format_opt != nullptr && format_opt->count()) c.format = format;
    if (low_opt->count()) c.shifter_low = shifter_low;
    if (high_opt->count()) c.shifter_high = shifter_high;
    if (noise_opt->count()) c.instrument_noise_sd = noise_sd;
    return c;
  }
};

MarketDataset load_dataset(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return dataset_from_json(text);
  }
  std::istringstream in(text);
  return read_dataset_csv(in);
}

nlohmann::json estimate_report(const MarketDataset& data, bool demand_intercept) {
  const IVFit demand = estimate_demand(data, {demand_intercept});
  const SupplyFit supply = estimate_supply(data);
  const double alpha0_hat = demand.coefficients(demand_intercept ? 1 : 0);
  const ThetaEstimate theta = recover_theta(supply.gamma_hat, alpha0_hat);

  nlohmann::json j;
  j["n_obs"] = data.size();
  j["demand"] = nlohmann::json::parse(fit_to_json(demand));
  j["supply"] = nlohmann::json::parse(fit_to_json(supply.fit));
  const int s = demand_intercept ? 1 : 0;
  j["alpha_hat"] = {demand.coefficients(s), demand.coefficients(s + 1), demand.coefficients(s + 2)};
  j["beta_hat"] = {supply.fit.coefficients(1), supply.fit.coefficients(2),
                   supply.fit.coefficients(3)};
  j["gamma_hat"] = supply.gamma_hat;
  j["theta_hat"] = theta.valid ? nlohmann::json(theta.theta_hat) : nlohmann::json(nullptr);
  j["theta_valid"] = theta.valid;
  return j;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conduct-parameter identification lab: simulate, estimate, Monte Carlo."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate one equilibrium dataset");
  SharedFlags sim_flags;
  sim_flags.attach(*sim, true, true);
  std::size_t sim_t = 0;
  auto* sim_t_opt = sim->add_option("-T,--sample-size", sim_t, "number of markets");

  // estimate
  auto* est = app.add_subcommand("estimate", "2SLS demand and supply fits plus theta");
  std::string dataset_path;
  bool demand_intercept = false;
  est->add_option("dataset", dataset_path, "dataset CSV (or .json)")->required();
  est->add_flag("--demand-intercept", demand_intercept, "add a constant to the demand equation");
  std::string est_out;
  est->add_option("--out", est_out, "output path (default stdout)");

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "bias/RMSE replication grid");
  SharedFlags mc_flags;
  mc_flags.attach(*mc, false, true);
  std::vector<double> mc_sigmas;
  std::vector<std::size_t> mc_sizes;
  std::size_t mc_reps = 0;
  std::string dump_path;
  auto* mc_sigma_opt =
      mc->add_option("--sigma", mc_sigmas, "error standard deviations")->delimiter(',');
  auto* mc_sizes_opt =
      mc->add_option("--sample-sizes", mc_sizes, "sample sizes, increasing")->delimiter(',');
  auto* mc_reps_opt = mc->add_option("--reps", mc_reps, "replications per cell");
  mc->add_option("--dump", dump_path, "write per-replication estimates CSV here");

  // check
  auto* chk = app.add_subcommand("check", "separability and exceptional-form verdicts");
  SharedFlags chk_flags;
  chk_flags.attach(*chk, true, false);
  double chk_q = 2.0, chk_x1 = 1.5, chk_x2 = 2.5;
  chk->add_option("--q", chk_q, "quantity at which to test")->capture_default_str();
  chk->add_option("--x1d", chk_x1, "demand shifter 1")->capture_default_str();
  chk->add_option("--x2d", chk_x2, "demand shifter 2")->capture_default_str();

  // nonident
  auto* ni = app.add_subcommand("nonident", "observationally equivalent pair demonstration");
  double ni_theta_a = 0.2, ni_theta_b = 0.5, ni_a = 1.0;
  LinearCost ni_cost;
  std::size_t ni_points = 1000;
  std::uint64_t ni_seed = 1;
  bool ni_perturb = false;
  ni->add_option("--theta-a", ni_theta_a, "conduct of model A")->capture_default_str();
  ni->add_option("--theta-b", ni_theta_b, "conduct of model B")->capture_default_str();
  ni->add_option("--a", ni_a, "demand slope magnitude")->capture_default_str();
  ni->add_option("--c0", ni_cost.c0, "cost intercept")->capture_default_str();
  ni->add_option("--c1", ni_cost.c1, "cost slope in Q")->capture_default_str();
  ni->add_option("--c2", ni_cost.c2, "cost slope in x1s")->capture_default_str();
  ni->add_option("--points", ni_points, "number of configurations")->capture_default_str();
  ni->add_option("--seed", ni_seed, "seed")->capture_default_str();
  ni->add_flag("--perturb", ni_perturb, "add 0.01 to model B's cost slope (negative control)");

  // config
  auto* cfg = app.add_subcommand("config", "print the effective configuration as JSON");
  SharedFlags cfg_flags;
  cfg_flags.attach(*cfg, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*sim) {
      RunConfig c = sim_flags.resolve();
      if (sim_t_opt->count()) c.sample_size = sim_t;
      if (!sim_flags.format_opt->count()) c.format = "csv";
      c.validate();
      const MarketDataset data = generate_dataset(c.dgp());
      std::string text;
      if (c.format == "json") {
        text = dataset_to_json(data) + "\n";
      } else {
        std::ostringstream buf;
        write_dataset_csv(data, buf);
        text = buf.str();
      }
      emit(text, c.out, out);
      return kOk;
    }

    if (*est) {
      const MarketDataset data = load_dataset(dataset_path);
      emit(estimate_report(data, demand_intercept).dump(2) + "\n", est_out, out);
      return kOk;
    }

    if (*mc) {
      RunConfig c = mc_flags.resolve();
      if (mc_sigma_opt->count()) c.sigmas = mc_sigmas;
      if (mc_sizes_opt->count()) c.sample_sizes = mc_sizes;
      if (mc_reps_opt->count()) c.reps = mc_reps;
      c.validate();
      if (c.format == "json") throw DomainError("format: montecarlo emits csv or markdown");
      ExperimentGrid grid = c.grid();
      grid.keep_draws = !dump_path.empty();
      const auto summaries = run_grid(grid, workers_from_env());
      emit(render_table(summaries, c.format == "csv" ? TableFormat::csv : TableFormat::markdown),
           c.out, out);
      if (!dump_path.empty()) {
        std::ostringstream buf;
        write_draws_csv(summaries, buf);
        emit(buf.str(), dump_path, out);
      }
      return kOk;
    }

    if (*chk) {
      // The verdicts are defined for any exponents, including parameter sets
      // (e.g. theta = 1, alpha0 = -1) that have no log supply relation.
      RunConfig c = chk_flags.resolve();
      std::ostringstream report;
      const SeparabilityVerdict v =
          check_separability(power_demand(c.params), chk_q, chk_x1, chk_x2);
      report << "separable: " << (v.separable ? "yes" : "no");
      if (c.params.theta == 0.0) {
        report << "; Lau exceptional form: undefined (theta = 0)";
      } else {
        report << "; Lau exceptional form: "
               << (lau_exception_check(c.params.alpha0, c.params.theta) ? "yes" : "no");
      }
      report.precision(3);
      report << std::scientific << "\nratio derivative in Q: " << v.derivative
             << " (ratio " << v.ratio << ")\n";
      emit(report.str(), c.out, out);
      return v.separable ? kOk : kCheckFailed;
    }

    if (*ni) {
      ModelPair pair = build_equivalent_pair(ni_theta_a, ni_theta_b, ni_a, ni_cost);
      if (ni_perturb) pair.model_b.cost.c1 += 0.01;
      const NonidentificationReport rep = demonstrate_nonidentification(pair, ni_points, ni_seed);
      out << describe(pair, rep);
      return rep.identical ? kOk : kCheckFailed;
    }

    if (*cfg) {
      RunConfig c = cfg_flags.resolve();
      c.validate();
      // --out names where this file goes, not an output setting to persist.
      RunConfig saved = c;
      saved.out.clear();
      emit(config_to_json(saved), c.out, out);
      return kOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const DegenerateError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const NumericalError& e) {
    err << "check failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace conduct::cli
