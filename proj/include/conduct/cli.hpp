#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "conduct/dgp.hpp"
#include "conduct/montecarlo.hpp"

namespace conduct::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 1;
inline constexpr int kIoFailure = 2;
inline constexpr int kCheckFailed = 3;

// On-disk mirror of StructuralParams, the dgp settings and ExperimentGrid.
// Serialized as one flat JSON object; every key is optional.
struct RunConfig {
  StructuralParams params;
  std::size_t sample_size = 100;
  std::uint64_t seed = 20240601;
  double shifter_low = 1.0;
  double shifter_high = 3.0;
  double instrument_noise_sd = 1.0;
  std::vector<double> sigmas{0.001, 0.5, 1.0};
  std::vector<std::size_t> sample_sizes{50, 100, 200, 1000};
  std::size_t reps = 1000;
  std::string format = "markdown";
  std::string out;

  DgpConfig dgp() const;
  ExperimentGrid grid() const;
  // Throws DomainError naming the offending field(s).
  void validate() const;
};

std::string config_to_json(const RunConfig& config);
// Throws ParseError with line/column for syntax errors and the field name for
// type errors or unknown keys.
RunConfig config_from_json(const std::string& text, RunConfig base = {});

// Worker count from CONDUCT_NUM_THREADS; 0 when unset.
int workers_from_env();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conduct::cli
