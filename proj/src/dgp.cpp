#include "conduct/dgp.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "conduct/errors.hpp"
#include "conduct/serialize.hpp"

namespace conduct {

void to_json(nlohmann::json& j, const StructuralParams& p) {
  j = nlohmann::json{{"alpha0", p.alpha0}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
                     {"beta0", p.beta0},   {"beta1", p.beta1},   {"beta2", p.beta2},
                     {"theta", p.theta},   {"sigma", p.sigma}};
}

void from_json(const nlohmann::json& j, StructuralParams& p) {
  if (!j.is_object()) throw ParseError("params: expected an object");
  for (const auto& [key, value] : j.items()) {
    double* slot = nullptr;
    if (key == "alpha0") slot = &p.alpha0;
    else if (key == "alpha1") slot = &p.alpha1;
    else if (key == "alpha2") slot = &p.alpha2;
    else if (key == "beta0") slot = &p.beta0;
    else if (key == "beta1") slot = &p.beta1;
    else if (key == "beta2") slot = &p.beta2;
    else if (key == "theta") slot = &p.theta;
    else if (key == "sigma") slot = &p.sigma;
    else throw ParseError("params." + key + ": unknown field");
    if (!value.is_number()) throw ParseError("params." + key + ": expected a number");
    *slot = value.get<double>();
  }
}

void DgpConfig::validate() const {
  params.validate();
  if (sample_size < 1) throw DomainError("sample_size must be at least 1");
  if (!(shifter_low > 0.0)) throw DomainError("shifter_low must be positive");
  if (!(shifter_low <= shifter_high) || !std::isfinite(shifter_high)) {
    throw DomainError("shifter_low must not exceed shifter_high");
  }
  if (!(instrument_noise_sd >= 0.0) || !std::isfinite(instrument_noise_sd)) {
    throw DomainError("instrument_noise_sd must be non-negative");
  }
}

void MarketDataset::reserve(std::size_t n) {
  for (auto* col : {&log_p, &log_q, &log_x1d, &log_x2d, &log_x1s, &log_x2s, &z1s, &z2s}) {
    col->reserve(n);
  }
}

void MarketDataset::validate() const {
  const std::vector<double>* cols[] = {&log_p,   &log_q,   &log_x1d, &log_x2d,
                                       &log_x1s, &log_x2s, &z1s,     &z2s};
  for (const auto* col : cols) {
    if (col->size() != log_p.size()) throw ParseError("dataset columns differ in length");
    for (double v : *col) {
      if (!std::isfinite(v)) throw ParseError("dataset contains a non-finite entry");
    }
  }
}

ExogenousDraw draw_exogenous(const DgpConfig& config, RandomStream& rng) {
  const double lo = config.shifter_low;
  const double hi = config.shifter_high;
  ExogenousDraw d;
  d.x1d = rng.uniform(lo, hi);
  d.x2d = rng.uniform(lo, hi);
  d.x1s = rng.uniform(lo, hi);
  d.x2s = rng.uniform(lo, hi);
  const double noise1 = rng.normal(config.instrument_noise_sd);
  const double noise2 = rng.normal(config.instrument_noise_sd);
  d.z1s = std::log(d.x1s) + noise1;
  d.z2s = std::log(d.x2s) + noise2;
  d.eps_d = rng.normal(config.params.sigma);
  d.eps_s = rng.normal(config.params.sigma);
  return d;
}

MarketDataset generate_dataset(const DgpConfig& config) {
  config.validate();
  RandomStream rng(config.seed);

  MarketDataset data;
  data.seed = config.seed;
  data.params = config.params;
  data.reserve(config.sample_size);
  for (std::size_t t = 0; t < config.sample_size; ++t) {
    const ExogenousDraw d = draw_exogenous(config, rng);
    const EquilibriumPoint eq = solve_equilibrium(config.params, d);
    data.log_p.push_back(eq.log_p);
    data.log_q.push_back(eq.log_q);
    data.log_x1d.push_back(std::log(d.x1d));
    data.log_x2d.push_back(std::log(d.x2d));
    data.log_x1s.push_back(std::log(d.x1s));
    data.log_x2s.push_back(std::log(d.x2s));
    data.z1s.push_back(d.z1s);
    data.z2s.push_back(d.z2s);
  }
  return data;
}

void write_dataset_csv(const MarketDataset& data, std::ostream& out) {
  out << kDatasetHeader << '\n';
  char buf[32];
  for (std::size_t t = 0; t < data.size(); ++t) {
    const double row[] = {data.log_p[t],   data.log_q[t],   data.log_x1d[t], data.log_x2d[t],
                          data.log_x1s[t], data.log_x2s[t], data.z1s[t],     data.z2s[t]};
    for (std::size_t c = 0; c < 8; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << buf << (c + 1 < 8 ? ',' : '\n');
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void fail_at(std::size_t line, std::size_t column, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ", column " << column << ": " << what;
  throw ParseError(msg.str());
}

}  // namespace

MarketDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  if (trim(line) != kDatasetHeader) {
    throw ParseError(std::string("line 1: expected header '") + kDatasetHeader + "'");
  }

  MarketDataset data;
  std::vector<double>* cols[] = {&data.log_p,   &data.log_q,   &data.log_x1d, &data.log_x2d,
                                 &data.log_x1s, &data.log_x2s, &data.z1s,     &data.z2s};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t column = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      ++column;
      if (column > 8) fail_at(line_no, column, "too many fields");
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        fail_at(line_no, column, "not a number: '" + std::string(cell) + "'");
      }
      if (!std::isfinite(value)) fail_at(line_no, column, "non-finite value");
      cols[column - 1]->push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (column < 8) fail_at(line_no, column, "expected 8 fields");
  }
  return data;
}

std::string dataset_to_json(const MarketDataset& data) {
  nlohmann::json j;
  j["seed"] = data.seed;
  j["params"] = data.params;
  j["log_p"] = data.log_p;
  j["log_q"] = data.log_q;
  j["log_x1d"] = data.log_x1d;
  j["log_x2d"] = data.log_x2d;
  j["log_x1s"] = data.log_x1s;
  j["log_x2s"] = data.log_x2s;
  j["z1s"] = data.z1s;
  j["z2s"] = data.z2s;
  return j.dump();
}

MarketDataset dataset_from_json(const std::string& text) {
  MarketDataset data;
  try {
    const auto j = nlohmann::json::parse(text);
    data.seed = j.at("seed").get<std::uint64_t>();
    data.params = j.at("params").get<StructuralParams>();
    j.at("log_p").get_to(data.log_p);
    j.at("log_q").get_to(data.log_q);
    j.at("log_x1d").get_to(data.log_x1d);
    j.at("log_x2d").get_to(data.log_x2d);
    j.at("log_x1s").get_to(data.log_x1s);
    j.at("log_x2s").get_to(data.log_x2s);
    j.at("z1s").get_to(data.z1s);
    j.at("z2s").get_to(data.z2s);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset json: ") + e.what());
  }
  data.validate();
  return data;
}

}  // namespace conduct
