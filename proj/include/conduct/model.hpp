#pragma once

#include <functional>

namespace conduct {

// Constants of the log-linear demand / marginal cost system
//   P  = exp(eps_d) Q^alpha0 (x1d)^alpha1 (x2d)^alpha2
//   MC = exp(eps_s) Q^beta0  (x1s)^beta1  (x2s)^beta2
// with supply relation P + theta * dP/dQ * Q = MC.
// Defaults are the simulation design used throughout the project.
struct StructuralParams {
  double alpha0 = -1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta0 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double theta = 0.5;
  double sigma = 1.0;

  // Throws DomainError or SingularModelError when an invariant fails.
  void validate() const;

  bool operator==(const StructuralParams&) const = default;
};

// One market's exogenous state. Shifters are levels, instruments and
// structural errors are on the log scale.
struct ExogenousDraw {
  double x1d = 1.0;
  double x2d = 1.0;
  double x1s = 1.0;
  double x2s = 1.0;
  double z1s = 0.0;
  double z2s = 0.0;
  double eps_d = 0.0;
  double eps_s = 0.0;
};

struct EquilibriumPoint {
  double log_q = 0.0;
  double log_p = 0.0;
};

/// Intercept of the log supply relation, -log(1 + theta * alpha0).
/// Throws DomainError when 1 + theta * alpha0 <= 0.
double supply_intercept(double theta, double alpha0);
inline double supply_intercept(const StructuralParams& p) {
  return supply_intercept(p.theta, p.alpha0);
}

/// Closed-form market equilibrium in logs.
EquilibriumPoint solve_equilibrium(const StructuralParams& params, const ExogenousDraw& draw);

// Residual of the log demand equation at (log_q, log_p); equals eps_d at equilibrium.
double demand_residual(const StructuralParams& params, const ExogenousDraw& draw,
                       const EquilibriumPoint& eq);
// Residual of the log supply relation; equals eps_s at equilibrium.
double supply_residual(const StructuralParams& params, const ExogenousDraw& draw,
                       const EquilibriumPoint& eq);

// Inverse demand P(Q, x1, x2) with two shifters.
using DemandFunction = std::function<double(double q, double x1, double x2)>;

// Power demand without the error term: Q^alpha0 x1^alpha1 x2^alpha2.
DemandFunction power_demand(const StructuralParams& params);

struct SeparabilityVerdict {
  bool separable = false;
  // d/dQ of (dP/dx1)/(dP/dx2), the quantity that vanishes under separability.
  double derivative = 0.0;
  // (dP/dx1)/(dP/dx2) at q.
  double ratio = 0.0;
};

/// Numeric Goldman-Uzawa check: the ratio of shifter partials must not move
/// with Q. Partials use central differences with step 1e-5 * max(1, |x|);
/// the Q-derivative of the ratio uses a central difference of half-width
/// `step` (<= 0 selects 1e-4 * max(1, q)). Separable when
/// |derivative| <= 1e-6 * (1 + |ratio|).
/// Throws NumericalError on a non-finite evaluation and DegenerateError when
/// dP/dx2 vanishes.
SeparabilityVerdict check_separability(const DemandFunction& demand, double q, double x1,
                                       double x2, double step = 0.0);

/// True when the pure power demand Q^alpha0 r(x) has the exceptional
/// exponent -1/theta, i.e. |alpha0 + 1/theta| <= 1e-12.
/// Throws DomainError when theta == 0.
bool lau_exception_check(double alpha0, double theta);

}  // namespace conduct
