#include "conduct/identlab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conduct/dgp.hpp"
#include "conduct/errors.hpp"
#include "conduct/estimation.hpp"
#include "conduct/rng.hpp"

namespace conduct {

namespace {

void check_slope(const LinearDemand& demand, const ConductModel& m, const char* label) {
  const double effective = m.cost.c1 + m.theta * demand.slope;
  if (!(effective > 0.0)) {
    std::ostringstream msg;
    msg << "model " << label << ": effective supply slope c1 + theta * a = " << effective
        << " is not positive";
    throw DegenerateError(msg.str());
  }
}

}  // namespace

ModelPair build_equivalent_pair(double theta_a, double theta_b, double a,
                                const LinearCost& base_cost, const LinearDemand& demand_shape) {
  if (theta_a == theta_b) throw DomainError("conduct parameters of the pair must differ");
  if (theta_a < 0.0 || theta_a > 1.0 || theta_b < 0.0 || theta_b > 1.0) {
    throw DomainError("conduct parameters must lie in [0, 1]");
  }
  if (!(a > 0.0)) throw DomainError("demand slope a must be positive");

  ModelPair pair;
  pair.demand = demand_shape;
  pair.demand.slope = a;
  pair.model_a = {theta_a, base_cost};
  pair.model_b = {theta_b, base_cost};
  pair.model_b.cost.c1 = base_cost.c1 - (theta_b - theta_a) * a;

  check_slope(pair.demand, pair.model_a, "A");
  check_slope(pair.demand, pair.model_b, "B");
  return pair;
}

LinearEquilibrium solve_linear_equilibrium(const LinearDemand& demand, const ConductModel& model,
                                           const ExogenousDraw& draw) {
  // Demand:          P + a Q                 = r(x) + eps_d
  // Supply relation: P - (theta a + c1) Q    = c0 + c2 x1s + eps_s
  const double a11 = 1.0, a12 = demand.slope;
  const double a21 = 1.0, a22 = -(model.theta * demand.slope + model.cost.c1);
  const double b1 = demand.r0 + demand.r1 * draw.x1d + demand.r2 * draw.x2d + draw.eps_d;
  const double b2 = model.cost.c0 + model.cost.c2 * draw.x1s + draw.eps_s;

  const double det = a11 * a22 - a12 * a21;
  if (!(std::abs(det) > 0.0)) throw DegenerateError("linear equilibrium system is singular");
  return {(a11 * b2 - a21 * b1) / det, (b1 * a22 - b2 * a12) / det};
}

NonidentificationReport demonstrate_nonidentification(const ModelPair& pair, std::size_t n_points,
                                                      std::uint64_t seed) {
  if (n_points < 1) throw DomainError("n_points must be at least 1");
  check_slope(pair.demand, pair.model_a, "A");
  check_slope(pair.demand, pair.model_b, "B");

  RandomStream rng(seed);
  NonidentificationReport rep;
  rep.n_points = n_points;
  for (std::size_t i = 0; i < n_points; ++i) {
    ExogenousDraw d;
    d.x1d = rng.uniform(1.0, 3.0);
    d.x2d = rng.uniform(1.0, 3.0);
    d.x1s = rng.uniform(1.0, 3.0);
    d.x2s = rng.uniform(1.0, 3.0);
    d.eps_d = rng.standard_normal();
    d.eps_s = rng.standard_normal();

    const LinearEquilibrium ea = solve_linear_equilibrium(pair.demand, pair.model_a, d);
    const LinearEquilibrium eb = solve_linear_equilibrium(pair.demand, pair.model_b, d);

    const double dq = std::abs(ea.q - eb.q);
    const double dp = std::abs(ea.p - eb.p);
    rep.max_abs_q = std::max(rep.max_abs_q, dq);
    rep.max_abs_p = std::max(rep.max_abs_p, dp);
    rep.max_rel_q = std::max(rep.max_rel_q, dq / std::max({1.0, std::abs(ea.q), std::abs(eb.q)}));
    rep.max_rel_p = std::max(rep.max_rel_p, dp / std::max({1.0, std::abs(ea.p), std::abs(eb.p)}));
  }
  rep.identical = rep.max_rel_q <= 1e-12 && rep.max_rel_p <= 1e-12;
  return rep;
}

std::string describe(const ModelPair& pair, const NonidentificationReport& report) {
  std::ostringstream out;
  out.precision(6);
  const auto& d = pair.demand;
  out << "demand: P = " << d.r0 << " + " << d.r1 << "*x1d + " << d.r2 << "*x2d - " << d.slope
      << "*Q + eps_d\n";
  for (const auto* m : {&pair.model_a, &pair.model_b}) {
    out << "model " << (m == &pair.model_a ? 'A' : 'B') << ": theta = " << m->theta
        << ", MC = " << m->cost.c0 << " + " << m->cost.c1 << "*Q + " << m->cost.c2
        << "*x1s + eps_s\n";
  }
  out.precision(3);
  out << std::scientific;
  out << "points: " << report.n_points << '\n';
  out << "max |Q_A - Q_B| = " << report.max_abs_q << " (relative " << report.max_rel_q << ")\n";
  out << "max |P_A - P_B| = " << report.max_abs_p << " (relative " << report.max_rel_p << ")\n";
  out << (report.identical ? "reduced forms identical (max discrepancy <= 1e-12)"
                           : "reduced forms differ (max discrepancy > 1e-12)")
      << '\n';
  return out.str();
}

namespace {

// Log-quantity root of (1 + theta_b a0) P(Q) - [MC_A(Q) + (theta_b - theta_a) a0 P(Q)].
double solve_modified_log_q(const StructuralParams& pa, double theta_b, const ExogenousDraw& d) {
  const auto excess = [&](double log_q) {
    const double q = std::exp(log_q);
    const double p = std::exp(d.eps_d) * std::pow(q, pa.alpha0) * std::pow(d.x1d, pa.alpha1) *
                     std::pow(d.x2d, pa.alpha2);
    const double mc_a = std::exp(d.eps_s) * std::pow(q, pa.beta0) * std::pow(d.x1s, pa.beta1) *
                        std::pow(d.x2s, pa.beta2);
    const double mc_b = mc_a + (theta_b - pa.theta) * pa.alpha0 * p;
    return (1.0 + theta_b * pa.alpha0) * p - mc_b;
  };
  double lo = -60.0, hi = 60.0;
  double f_lo = excess(lo);
  if (f_lo * excess(hi) > 0.0) throw NumericalError("modified equilibrium is not bracketed");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = excess(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ContrastResult contrast_loglinear(const StructuralParams& model_a, double theta_b,
                                  std::size_t sample_size, std::uint64_t seed) {
  model_a.validate();
  ContrastResult out;
  out.gamma_a = supply_intercept(model_a);
  out.gamma_b = supply_intercept(theta_b, model_a.alpha0);

  DgpConfig cfg;
  cfg.params = model_a;
  cfg.sample_size = sample_size;
  cfg.seed = seed;
  cfg.validate();

  RandomStream rng(seed);
  MarketDataset data;
  data.seed = seed;
  data.params = model_a;
  data.reserve(sample_size);
  for (std::size_t t = 0; t < sample_size; ++t) {
    const ExogenousDraw d = draw_exogenous(cfg, rng);
    const double log_q = solve_modified_log_q(model_a, theta_b, d);
    data.log_q.push_back(log_q);
    data.log_p.push_back(d.eps_d + model_a.alpha0 * log_q + model_a.alpha1 * std::log(d.x1d) +
                         model_a.alpha2 * std::log(d.x2d));
    data.log_x1d.push_back(std::log(d.x1d));
    data.log_x2d.push_back(std::log(d.x2d));
    data.log_x1s.push_back(std::log(d.x1s));
    data.log_x2s.push_back(std::log(d.x2s));
    data.z1s.push_back(d.z1s);
    data.z2s.push_back(d.z2s);
  }

  const SupplyFit supply = estimate_supply(data);
  out.gamma_hat = supply.gamma_hat;
  out.theta_hat = recover_theta(out.gamma_hat, model_a.alpha0).theta_hat;
  return out;
}

}  // namespace conduct
