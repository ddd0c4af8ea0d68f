#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "conduct/model.hpp"

namespace conduct {

// Linear witness family for observational equivalence.
//   demand   P = r(x) - a Q + eps_d,  r(x) = r0 + r1 x1d + r2 x2d
//   cost     MC = c0 + c1 Q + c2 x1s + eps_s
struct LinearDemand {
  double slope = 1.0;  // a > 0
  double r0 = 10.0;
  double r1 = 1.0;
  double r2 = 1.0;
};

struct LinearCost {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;

  bool operator==(const LinearCost&) const = default;
};

struct ConductModel {
  double theta = 0.0;
  LinearCost cost;
};

struct ModelPair {
  LinearDemand demand;
  ConductModel model_a;
  ConductModel model_b;
};

/// Builds model B from model A so that both supply relations coincide:
/// g_B = g_A + (theta_b - theta_a) * s'(Q) * Q, i.e. c1_B = c1 - (theta_b - theta_a) * a.
/// Throws DomainError on theta_a == theta_b, thetas outside [0, 1] or a <= 0,
/// and DegenerateError when either model's effective supply slope
/// c1 + theta * a is non-positive.
ModelPair build_equivalent_pair(double theta_a, double theta_b, double a,
                                const LinearCost& base_cost, const LinearDemand& demand_shape = {});

struct LinearEquilibrium {
  double q = 0.0;
  double p = 0.0;
};

// Solves demand and supply relation as a 2x2 linear system in (P, Q).
LinearEquilibrium solve_linear_equilibrium(const LinearDemand& demand, const ConductModel& model,
                                           const ExogenousDraw& draw);

struct NonidentificationReport {
  std::size_t n_points = 0;
  double max_abs_q = 0.0;
  double max_abs_p = 0.0;
  // |A - B| / max(1, |A|, |B|), maximized over points.
  double max_rel_q = 0.0;
  double max_rel_p = 0.0;
  bool identical = false;  // both relative maxima <= 1e-12
};

/// Draws shifters on U(1, 3) and unit-variance errors, solves each model on
/// its own, and reports the largest reduced-form discrepancy.
NonidentificationReport demonstrate_nonidentification(const ModelPair& pair, std::size_t n_points,
                                                      std::uint64_t seed);

std::string describe(const ModelPair& pair, const NonidentificationReport& report);

// Applying the same cost correction to the log-linear demand gives
// MC_B = MC_A + (theta_b - theta_a) * alpha0 * P, which is not a power
// function of (Q, x1s, x2s). ContrastResult compares a supply-relation fit on
// data from that model against both candidate intercepts.
struct ContrastResult {
  double gamma_hat = 0.0;
  double gamma_a = 0.0;  // intercept implied by (theta_a, power cost)
  double gamma_b = 0.0;  // intercept the fit would need to support theta_b
  double theta_hat = 0.0;
};

/// Simulates T markets from model B (theta_b with corrected cost) by solving
/// its level supply relation with bisection, then fits the log supply
/// relation by 2SLS using the true alpha0.
ContrastResult contrast_loglinear(const StructuralParams& model_a, double theta_b,
                                  std::size_t sample_size, std::uint64_t seed);

}  // namespace conduct
