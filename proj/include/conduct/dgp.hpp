#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "conduct/model.hpp"
#include "conduct/rng.hpp"

namespace conduct {

struct DgpConfig {
  StructuralParams params;
  std::size_t sample_size = 100;
  std::uint64_t seed = 0;
  double shifter_low = 1.0;
  double shifter_high = 3.0;
  double instrument_noise_sd = 1.0;

  // Collapsed bounds (low == high) are accepted and give constant shifters.
  void validate() const;
};

// Column-oriented sample on the log scale.
struct MarketDataset {
  std::vector<double> log_p;
  std::vector<double> log_q;
  std::vector<double> log_x1d;
  std::vector<double> log_x2d;
  std::vector<double> log_x1s;
  std::vector<double> log_x2s;
  std::vector<double> z1s;
  std::vector<double> z2s;

  std::uint64_t seed = 0;
  StructuralParams params;

  std::size_t size() const { return log_p.size(); }
  void reserve(std::size_t n);
  // Throws ParseError when column lengths differ or an entry is not finite.
  void validate() const;

  bool operator==(const MarketDataset&) const = default;
};

inline constexpr const char* kDatasetHeader = "log_p,log_q,log_x1d,log_x2d,log_x1s,log_x2s,z1s,z2s";

// Draw order is fixed: x1d, x2d, x1s, x2s, instrument noise 1 and 2, eps_d, eps_s.
ExogenousDraw draw_exogenous(const DgpConfig& config, RandomStream& rng);

MarketDataset generate_dataset(const DgpConfig& config);

// CSV with kDatasetHeader, 17 significant digits per value.
void write_dataset_csv(const MarketDataset& data, std::ostream& out);
// Throws ParseError citing the offending line and column.
MarketDataset read_dataset_csv(std::istream& in);

// JSON object with metadata (seed, params) and the eight columns.
std::string dataset_to_json(const MarketDataset& data);
MarketDataset dataset_from_json(const std::string& text);

}  // namespace conduct
