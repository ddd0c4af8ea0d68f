#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "conduct/model.hpp"

namespace conduct {

// Estimated quantities in reporting order.
enum class Parameter : std::size_t { alpha0, alpha1, alpha2, beta0, beta1, beta2, theta };
inline constexpr std::size_t kParameterCount = 7;

std::string_view parameter_name(Parameter p);   // ascii, e.g. "alpha0"
std::string_view parameter_label(Parameter p);  // display, e.g. "α₀"
double true_value(const StructuralParams& params, Parameter p);

struct ExperimentGrid {
  StructuralParams params;
  std::vector<double> sigmas{0.001, 0.5, 1.0};
  std::vector<std::size_t> sample_sizes{50, 100, 200, 1000};
  std::size_t n_reps = 1000;
  std::uint64_t master_seed = 20240601;
  double shifter_low = 1.0;
  double shifter_high = 3.0;
  double instrument_noise_sd = 1.0;
  // Keep every replication's estimates in McSummary::draws.
  bool keep_draws = false;

  void validate() const;
};

struct BiasRmse {
  double bias = 0.0;
  double rmse = 0.0;
};

// Estimates of one replication; valid == false marks a failed fit or an
// undefined theta.
struct ReplicationResult {
  std::array<double, kParameterCount> estimate{};
  bool valid = false;
};

struct McSummary {
  double sigma = 0.0;
  std::size_t sample_size = 0;
  std::array<BiasRmse, kParameterCount> stats{};
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  // Per-replication estimates, filled only when the grid asks for them.
  std::vector<ReplicationResult> draws;

  const BiasRmse& operator[](Parameter p) const { return stats[static_cast<std::size_t>(p)]; }
};

// Seed of replication `rep` in cell (sigma_index, size_index).
std::uint64_t replication_seed(std::uint64_t master, std::size_t sigma_index,
                               std::size_t size_index, std::size_t rep);

// Generate, estimate demand then supply, recover theta. Never throws on
// estimation failure; the result is flagged invalid instead.
ReplicationResult run_replication(const ExperimentGrid& grid, double sigma,
                                  std::size_t sample_size, std::uint64_t seed);

// Bias and RMSE over the valid replications, reduced in index order.
// Throws EmptyInputError when no replication is valid.
McSummary summarize(const StructuralParams& truth, double sigma, std::size_t sample_size,
                    const std::vector<ReplicationResult>& reps, bool keep_draws);

/// One (sigma, T) cell. Replications run on an OpenMP team of `workers`
/// threads (0 means the runtime default); output does not depend on it.
McSummary run_cell(const ExperimentGrid& grid, std::size_t sigma_index, std::size_t size_index,
                   int workers = 0);

/// All cells ordered by sigma then T, both in grid order.
std::vector<McSummary> run_grid(const ExperimentGrid& grid, int workers = 0);

// Single-threaded reference for run_cell / run_grid.
namespace serial {
McSummary run_cell(const ExperimentGrid& grid, std::size_t sigma_index, std::size_t size_index);
std::vector<McSummary> run_grid(const ExperimentGrid& grid);
}  // namespace serial

enum class TableFormat { csv, markdown };

// Markdown: one table per sigma, rows alpha0..theta, Bias/RMSE pairs per T,
// three decimals. CSV: tidy rows sigma,T,parameter,bias,rmse,n_valid.
// Throws EmptyInputError on an empty list.
std::string render_table(const std::vector<McSummary>& summaries, TableFormat format);

// sigma,T,rep,parameter,estimate for every kept replication.
void write_draws_csv(const std::vector<McSummary>& summaries, std::ostream& out);

// Three decimals, round-half-to-even on the binary value; "-0.000" prints as "0.000".
std::string format_3dp(double v);

}  // namespace conduct
