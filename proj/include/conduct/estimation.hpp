#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conduct/dgp.hpp"

namespace conduct {

struct IVFit {
  Eigen::VectorXd coefficients;
  // Structural residuals y - X b (not the second-stage residuals).
  Eigen::VectorXd residuals;
  // Centered R^2 of the first-stage projection, one per endogenous regressor.
  std::vector<double> first_stage_r2;
  std::size_t n_obs = 0;
  std::vector<std::string> regressor_names;
  std::vector<std::string> instrument_names;
  std::vector<std::string> endogenous_names;
};

/// Two-stage least squares through two QR projections (no explicit inverse).
///
/// `endogenous` lists the regressor columns that get a first-stage R^2; when
/// empty, every column is reported. Instruments are checked for full column
/// rank with a column-pivoting QR at tolerance 1e-10 relative to the largest
/// pivot, and the projected regressors likewise.
///
/// Throws InsufficientDataError when T <= m and RankDeficientError on
/// collinear instruments or projected regressors. Requires m >= k.
IVFit fit_2sls(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
               const Eigen::MatrixXd& instruments, const std::vector<int>& endogenous = {});

// Second-stage regressor matrix P_Z X; exposed for diagnostics.
Eigen::MatrixXd project_onto_instruments(const Eigen::MatrixXd& regressors,
                                         const Eigen::MatrixXd& instruments);

// JSON record: names, coefficients, first-stage R^2, n_obs.
std::string fit_to_json(const IVFit& fit);

struct DemandOptions {
  bool intercept = false;
};

/// log_p on [log_q, log_x1d, log_x2d], instruments [z1s, z2s, log_x1d, log_x2d].
/// Coefficients (alpha0, alpha1, alpha2); with `intercept` a leading constant
/// is added to both sets. Needs T >= 5.
IVFit estimate_demand(const MarketDataset& data, const DemandOptions& options = {});

struct SupplyFit {
  IVFit fit;
  double gamma_hat = 0.0;
};

/// log_p on [1, log_q, log_x1s, log_x2s], instruments
/// [1, log_x1d, log_x2d, log_x1s, log_x2s]. Coefficients (gamma, beta0,
/// beta1, beta2). Needs T >= 6.
SupplyFit estimate_supply(const MarketDataset& data);

struct ThetaEstimate {
  double gamma_hat = 0.0;
  double theta_hat = 0.0;
  double alpha0_hat = 0.0;
  bool valid = false;
};

// theta = (exp(-gamma) - 1) / alpha0. Invalid (theta NaN) when |alpha0| < 1e-8.
ThetaEstimate recover_theta(double gamma_hat, double alpha0_hat);

}  // namespace conduct
