#include "conduct/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conduct/errors.hpp"

namespace conduct {

void StructuralParams::validate() const {
  const double fields[] = {alpha0, alpha1, alpha2, beta0, beta1, beta2, theta, sigma};
  for (double v : fields) {
    if (!std::isfinite(v)) throw DomainError("structural parameters must be finite");
  }
  if (theta < 0.0 || theta > 1.0) {
    std::ostringstream msg;
    msg << "theta must lie in [0, 1], got " << theta;
    throw DomainError(msg.str());
  }
  if (1.0 + theta * alpha0 <= 0.0) {
    std::ostringstream msg;
    msg << "1 + theta * alpha0 must be positive, got " << 1.0 + theta * alpha0;
    throw DomainError(msg.str());
  }
  if (sigma < 0.0) throw DomainError("sigma must be non-negative");
  if (std::abs(alpha0 - beta0) < 1e-12) {
    throw SingularModelError("alpha0 and beta0 coincide; equilibrium is not unique");
  }
}

double supply_intercept(double theta, double alpha0) {
  const double markup = 1.0 + theta * alpha0;
  if (!(markup > 0.0)) {
    std::ostringstream msg;
    msg << "supply intercept undefined: 1 + theta * alpha0 = " << markup;
    throw DomainError(msg.str());
  }
  return -std::log(markup);
}

EquilibriumPoint solve_equilibrium(const StructuralParams& p, const ExogenousDraw& d) {
  const double gamma = supply_intercept(p);
  const double slope_gap = p.alpha0 - p.beta0;
  if (std::abs(slope_gap) < 1e-12) {
    throw SingularModelError("alpha0 and beta0 coincide; equilibrium is not unique");
  }
  const double demand_shift = p.alpha1 * std::log(d.x1d) + p.alpha2 * std::log(d.x2d) + d.eps_d;
  const double supply_shift =
      gamma + p.beta1 * std::log(d.x1s) + p.beta2 * std::log(d.x2s) + d.eps_s;

  EquilibriumPoint eq;
  eq.log_q = (supply_shift - demand_shift) / slope_gap;
  eq.log_p = p.alpha0 * eq.log_q + demand_shift;
  return eq;
}

double demand_residual(const StructuralParams& p, const ExogenousDraw& d,
                       const EquilibriumPoint& eq) {
  return eq.log_p - p.alpha0 * eq.log_q - p.alpha1 * std::log(d.x1d) -
         p.alpha2 * std::log(d.x2d);
}

double supply_residual(const StructuralParams& p, const ExogenousDraw& d,
                       const EquilibriumPoint& eq) {
  return eq.log_p - supply_intercept(p) - p.beta0 * eq.log_q - p.beta1 * std::log(d.x1s) -
         p.beta2 * std::log(d.x2s);
}

DemandFunction power_demand(const StructuralParams& params) {
  return [a0 = params.alpha0, a1 = params.alpha1, a2 = params.alpha2](double q, double x1,
                                                                      double x2) {
    return std::pow(q, a0) * std::pow(x1, a1) * std::pow(x2, a2);
  };
}

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw NumericalError("non-finite demand evaluation");
  return v;
}

double shifter_ratio(const DemandFunction& demand, double q, double x1, double x2) {
  const double h1 = 1e-5 * std::max(1.0, std::abs(x1));
  const double h2 = 1e-5 * std::max(1.0, std::abs(x2));
  const double d1 =
      (checked(demand(q, x1 + h1, x2)) - checked(demand(q, x1 - h1, x2))) / (2.0 * h1);
  const double d2 =
      (checked(demand(q, x1, x2 + h2)) - checked(demand(q, x1, x2 - h2))) / (2.0 * h2);
  const double level = std::abs(checked(demand(q, x1, x2)));
  if (std::abs(d2) <= 1e-10 * std::max(1.0, level)) {
    throw DegenerateError("dP/dx2 vanishes; shifter ratio undefined");
  }
  return checked(d1 / d2);
}

}  // namespace

SeparabilityVerdict check_separability(const DemandFunction& demand, double q, double x1,
                                       double x2, double step) {
  if (!(q > 0.0) || !(x1 > 0.0) || !(x2 > 0.0)) {
    throw DomainError("separability check needs positive quantity and shifters");
  }
  if (step <= 0.0) step = 1e-4 * std::max(1.0, q);
  if (step >= q) throw DomainError("outer step must be smaller than q");

  const double lo = shifter_ratio(demand, q - step, x1, x2);
  const double hi = shifter_ratio(demand, q + step, x1, x2);

  SeparabilityVerdict v;
  v.ratio = shifter_ratio(demand, q, x1, x2);
  v.derivative = checked((hi - lo) / (2.0 * step));
  v.separable = std::abs(v.derivative) <= 1e-6 * (1.0 + std::abs(v.ratio));
  return v;
}

bool lau_exception_check(double alpha0, double theta) {
  if (theta == 0.0) throw DomainError("exceptional-form exponent -1/theta undefined at theta = 0");
  return std::abs(alpha0 + 1.0 / theta) <= 1e-12;
}

}  // namespace conduct
