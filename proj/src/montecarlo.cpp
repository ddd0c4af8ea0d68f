#include "conduct/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "conduct/dgp.hpp"
#include "conduct/errors.hpp"
#include "conduct/estimation.hpp"
#include "conduct/rng.hpp"

namespace conduct {

std::string_view parameter_name(Parameter p) {
  constexpr std::string_view names[] = {"alpha0", "alpha1", "alpha2", "beta0",
                                        "beta1",  "beta2",  "theta"};
  return names[static_cast<std::size_t>(p)];
}

std::string_view parameter_label(Parameter p) {
  constexpr std::string_view labels[] = {"α₀", "α₁", "α₂", "β₀", "β₁", "β₂", "θ"};
  return labels[static_cast<std::size_t>(p)];
}

double true_value(const StructuralParams& params, Parameter p) {
  switch (p) {
    case Parameter::alpha0: return params.alpha0;
    case Parameter::alpha1: return params.alpha1;
    case Parameter::alpha2: return params.alpha2;
    case Parameter::beta0: return params.beta0;
    case Parameter::beta1: return params.beta1;
    case Parameter::beta2: return params.beta2;
    case Parameter::theta: return params.theta;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void ExperimentGrid::validate() const {
  params.validate();
  if (n_reps < 1) throw DomainError("n_reps must be at least 1");
  if (sigmas.empty()) throw DomainError("sigmas must not be empty");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("sigmas must be non-negative");
  }
  if (sample_sizes.empty()) throw DomainError("sample_sizes must not be empty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 1) throw DomainError("sample_sizes must be positive");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
      throw DomainError("sample_sizes must be strictly increasing");
    }
  }
  DgpConfig probe;
  probe.params = params;
  probe.shifter_low = shifter_low;
  probe.shifter_high = shifter_high;
  probe.instrument_noise_sd = instrument_noise_sd;
  probe.validate();
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t sigma_index,
                               std::size_t size_index, std::size_t rep) {
  return substream_seed(master, {sigma_index, size_index, rep});
}

ReplicationResult run_replication(const ExperimentGrid& grid, double sigma,
                                  std::size_t sample_size, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.params = grid.params;
  cfg.params.sigma = sigma;
  cfg.sample_size = sample_size;
  cfg.seed = seed;
  cfg.shifter_low = grid.shifter_low;
  cfg.shifter_high = grid.shifter_high;
  cfg.instrument_noise_sd = grid.instrument_noise_sd;

  ReplicationResult out;
  out.estimate.fill(std::numeric_limits<double>::quiet_NaN());
  try {
    const MarketDataset data = generate_dataset(cfg);
    const IVFit demand = estimate_demand(data);
    const SupplyFit supply = estimate_supply(data);
    const ThetaEstimate theta = recover_theta(supply.gamma_hat, demand.coefficients(0));
    out.estimate = {demand.coefficients(0),      demand.coefficients(1),
                    demand.coefficients(2),      supply.fit.coefficients(1),
                    supply.fit.coefficients(2),  supply.fit.coefficients(3),
                    theta.theta_hat};
    out.valid = theta.valid;
    for (double v : out.estimate) out.valid = out.valid && std::isfinite(v);
  } catch (const RankDeficientError&) {
  } catch (const InsufficientDataError&) {
  }
  return out;
}

McSummary summarize(const StructuralParams& truth, double sigma, std::size_t sample_size,
                    const std::vector<ReplicationResult>& reps, bool keep_draws) {
  McSummary s;
  s.sigma = sigma;
  s.sample_size = sample_size;
  for (const auto& r : reps) (r.valid ? s.n_valid : s.n_invalid) += 1;
  if (s.n_valid == 0) {
    std::ostringstream msg;
    msg << "every replication failed for sigma=" << sigma << ", T=" << sample_size;
    throw EmptyInputError(msg.str());
  }

  const double n = static_cast<double>(s.n_valid);
  for (std::size_t k = 0; k < kParameterCount; ++k) {
    const double target = true_value(truth, static_cast<Parameter>(k));
    double sum = 0.0;
    for (const auto& r : reps) {
      if (r.valid) sum += r.estimate[k] - target;
    }
    const double bias = sum / n;
    double ss = 0.0;
    for (const auto& r : reps) {
      if (!r.valid) continue;
      const double d = r.estimate[k] - target - bias;
      ss += d * d;
    }
    // mean squared error = bias^2 + variance; this ordering keeps rmse >= |bias|
    // exact in floating point.
    s.stats[k].bias = bias;
    s.stats[k].rmse = std::sqrt(bias * bias + ss / n);
  }
  if (keep_draws) s.draws = reps;
  return s;
}

namespace {

void check_indices(const ExperimentGrid& grid, std::size_t sigma_index, std::size_t size_index) {
  if (sigma_index >= grid.sigmas.size() || size_index >= grid.sample_sizes.size()) {
    throw DomainError("cell index outside the experiment grid");
  }
}

}  // namespace

McSummary run_cell(const ExperimentGrid& grid, std::size_t sigma_index, std::size_t size_index,
                   int workers) {
  grid.validate();
  check_indices(grid, sigma_index, size_index);
  const double sigma = grid.sigmas[sigma_index];
  const std::size_t t = grid.sample_sizes[size_index];
  std::vector<ReplicationResult> reps(grid.n_reps);
  const auto n = static_cast<std::ptrdiff_t>(grid.n_reps);

#ifdef _OPENMP
  const int team = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(team)
#else
  (void)workers;
#endif
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto rep = static_cast<std::size_t>(r);
    reps[rep] = run_replication(grid, sigma, t,
                                replication_seed(grid.master_seed, sigma_index, size_index, rep));
  }
  return summarize(grid.params, sigma, t, reps, grid.keep_draws);
}

std::vector<McSummary> run_grid(const ExperimentGrid& grid, int workers) {
  grid.validate();
  std::vector<McSummary> out;
  for (std::size_t i = 0; i < grid.sigmas.size(); ++i) {
    for (std::size_t j = 0; j < grid.sample_sizes.size(); ++j) {
      out.push_back(run_cell(grid, i, j, workers));
    }
  }
  return out;
}

namespace serial {

McSummary run_cell(const ExperimentGrid& grid, std::size_t sigma_index, std::size_t size_index) {
  grid.validate();
  check_indices(grid, sigma_index, size_index);
  const double sigma = grid.sigmas[sigma_index];
  const std::size_t t = grid.sample_sizes[size_index];
  std::vector<ReplicationResult> reps;
  reps.reserve(grid.n_reps);
  for (std::size_t r = 0; r < grid.n_reps; ++r) {
    reps.push_back(run_replication(
        grid, sigma, t, replication_seed(grid.master_seed, sigma_index, size_index, r)));
  }
  return summarize(grid.params, sigma, t, reps, grid.keep_draws);
}

std::vector<McSummary> run_grid(const ExperimentGrid& grid) {
  std::vector<McSummary> out;
  for (std::size_t i = 0; i < grid.sigmas.size(); ++i) {
    for (std::size_t j = 0; j < grid.sample_sizes.size(); ++j) {
      out.push_back(serial::run_cell(grid, i, j));
    }
  }
  return out;
}

}  // namespace serial

std::string format_3dp(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

namespace {

std::string full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_markdown(const std::vector<McSummary>& summaries) {
  std::ostringstream out;
  std::vector<double> sigmas;
  for (const auto& s : summaries) {
    if (sigmas.empty() || sigmas.back() != s.sigma) sigmas.push_back(s.sigma);
  }
  bool first = true;
  for (double sigma : sigmas) {
    std::vector<const McSummary*> cells;
    for (const auto& s : summaries) {
      if (s.sigma == sigma) cells.push_back(&s);
    }
    if (!first) out << '\n';
    first = false;
    out << "sigma = " << full_precision(sigma) << "\n\n";
    out << "| |";
    for (std::size_t c = 0; c < cells.size(); ++c) out << " Bias | RMSE |";
    out << "\n|---|";
    for (std::size_t c = 0; c < cells.size(); ++c) out << "---:|---:|";
    out << '\n';
    for (std::size_t k = 0; k < kParameterCount; ++k) {
      out << "| " << parameter_label(static_cast<Parameter>(k)) << " |";
      for (const auto* c : cells) {
        out << ' ' << format_3dp(c->stats[k].bias) << " | " << format_3dp(c->stats[k].rmse) << " |";
      }
      out << '\n';
    }
    out << "| Sample size (T) |";
    for (const auto* c : cells) out << "  | " << c->sample_size << " |";
    out << "\n| Valid replications |";
    for (const auto* c : cells) out << "  | " << c->n_valid << " |";
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const std::vector<McSummary>& summaries) {
  std::ostringstream out;
  out << "sigma,T,parameter,bias,rmse,n_valid\n";
  for (const auto& s : summaries) {
    for (std::size_t k = 0; k < kParameterCount; ++k) {
      out << full_precision(s.sigma) << ',' << s.sample_size << ','
          << parameter_name(static_cast<Parameter>(k)) << ',' << full_precision(s.stats[k].bias)
          << ',' << full_precision(s.stats[k].rmse) << ',' << s.n_valid << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string render_table(const std::vector<McSummary>& summaries, TableFormat format) {
  if (summaries.empty()) throw EmptyInputError("render_table: no summaries");
  return format == TableFormat::csv ? render_csv(summaries) : render_markdown(summaries);
}

void write_draws_csv(const std::vector<McSummary>& summaries, std::ostream& out) {
  out << "sigma,T,rep,parameter,estimate\n";
  for (const auto& s : summaries) {
    for (std::size_t r = 0; r < s.draws.size(); ++r) {
      for (std::size_t k = 0; k < kParameterCount; ++k) {
        const double v = s.draws[r].valid ? s.draws[r].estimate[k]
                                          : std::numeric_limits<double>::quiet_NaN();
        out << full_precision(s.sigma) << ',' << s.sample_size << ',' << r << ','
            << parameter_name(static_cast<Parameter>(k)) << ',' << full_precision(v) << '\n';
      }
    }
  }
}

}  // namespace conduct
