#include "conduct/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conduct/errors.hpp"
#include "conduct/serialize.hpp"

namespace conduct {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_checked_qr(const Eigen::MatrixXd& m,
                                                            const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.rows(), m.cols());
  qr.setThreshold(kRankTolerance);
  qr.compute(m);
  if (qr.rank() < m.cols()) {
    std::ostringstream msg;
    msg << what << " matrix has rank " << qr.rank() << " < " << m.cols() << " columns";
    throw RankDeficientError(msg.str());
  }
  return qr;
}

// Orthonormal basis of the instrument column space (T x m thin Q).
Eigen::MatrixXd instrument_basis(const Eigen::MatrixXd& instruments) {
  const auto qr = rank_checked_qr(instruments, "instrument");
  return qr.householderQ() * Eigen::MatrixXd::Identity(instruments.rows(), instruments.cols());
}

double centered_r2(const Eigen::VectorXd& x, const Eigen::VectorXd& fitted) {
  const double mean = x.mean();
  const double total = (x.array() - mean).square().sum();
  if (total == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - (x - fitted).squaredNorm() / total;
}

}  // namespace

Eigen::MatrixXd project_onto_instruments(const Eigen::MatrixXd& regressors,
                                         const Eigen::MatrixXd& instruments) {
  const Eigen::MatrixXd basis = instrument_basis(instruments);
  return basis * (basis.transpose() * regressors);
}

IVFit fit_2sls(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
               const Eigen::MatrixXd& instruments, const std::vector<int>& endogenous) {
  const auto t = instruments.rows();
  const auto k = regressors.cols();
  const auto m = instruments.cols();
  if (regressors.rows() != t || y.size() != t) {
    throw DomainError("fit_2sls: y, regressors and instruments must share a row count");
  }
  if (k == 0) throw DomainError("fit_2sls: no regressors");
  if (m < k) throw RankDeficientError("fit_2sls: fewer instruments than regressors");
  if (t <= m) {
    std::ostringstream msg;
    msg << "fit_2sls: " << t << " observations for " << m << " instruments";
    throw InsufficientDataError(msg.str());
  }

  const Eigen::MatrixXd basis = instrument_basis(instruments);
  const Eigen::MatrixXd projected = basis * (basis.transpose() * regressors);

  const auto second = rank_checked_qr(projected, "projected regressor");

  IVFit fit;
  fit.coefficients = second.solve(y);
  fit.residuals = y - regressors * fit.coefficients;
  fit.n_obs = static_cast<std::size_t>(t);

  if (endogenous.empty()) {
    for (Eigen::Index c = 0; c < k; ++c) {
      fit.first_stage_r2.push_back(centered_r2(regressors.col(c), projected.col(c)));
    }
  } else {
    for (int c : endogenous) {
      if (c < 0 || c >= k) throw DomainError("fit_2sls: endogenous column out of range");
      fit.first_stage_r2.push_back(centered_r2(regressors.col(c), projected.col(c)));
    }
  }
  return fit;
}

std::string fit_to_json(const IVFit& fit) {
  nlohmann::json j;
  j["regressors"] = fit.regressor_names;
  j["instruments"] = fit.instrument_names;
  j["coefficients"] = std::vector<double>(fit.coefficients.begin(), fit.coefficients.end());
  nlohmann::json r2 = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.first_stage_r2.size(); ++i) {
    const std::string name =
        i < fit.endogenous_names.size() ? fit.endogenous_names[i] : std::to_string(i);
    r2[name] = fit.first_stage_r2[i];
  }
  j["first_stage_r2"] = r2;
  j["n_obs"] = fit.n_obs;
  return j.dump();
}

namespace {

Eigen::Map<const Eigen::VectorXd> column(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void require_rows(const MarketDataset& data, std::size_t minimum, const char* equation) {
  data.validate();
  if (data.size() < minimum) {
    std::ostringstream msg;
    msg << equation << " equation needs at least " << minimum << " observations, got "
        << data.size();
    throw InsufficientDataError(msg.str());
  }
}

}  // namespace

IVFit estimate_demand(const MarketDataset& data, const DemandOptions& options) {
  require_rows(data, 5, "demand");
  const auto t = static_cast<Eigen::Index>(data.size());
  const int shift = options.intercept ? 1 : 0;

  Eigen::MatrixXd x(t, 3 + shift);
  Eigen::MatrixXd z(t, 4 + shift);
  if (options.intercept) {
    x.col(0).setOnes();
    z.col(0).setOnes();
  }
  x.col(shift + 0) = column(data.log_q);
  x.col(shift + 1) = column(data.log_x1d);
  x.col(shift + 2) = column(data.log_x2d);
  z.col(shift + 0) = column(data.z1s);
  z.col(shift + 1) = column(data.z2s);
  z.col(shift + 2) = column(data.log_x1d);
  z.col(shift + 3) = column(data.log_x2d);

  IVFit fit = fit_2sls(column(data.log_p), x, z, {shift});
  fit.regressor_names = {"log_q", "log_x1d", "log_x2d"};
  fit.instrument_names = {"z1s", "z2s", "log_x1d", "log_x2d"};
  if (options.intercept) {
    fit.regressor_names.insert(fit.regressor_names.begin(), "const");
    fit.instrument_names.insert(fit.instrument_names.begin(), "const");
  }
  fit.endogenous_names = {"log_q"};
  return fit;
}

SupplyFit estimate_supply(const MarketDataset& data) {
  require_rows(data, 6, "supply");
  const auto t = static_cast<Eigen::Index>(data.size());

  Eigen::MatrixXd x(t, 4);
  x.col(0).setOnes();
  x.col(1) = column(data.log_q);
  x.col(2) = column(data.log_x1s);
  x.col(3) = column(data.log_x2s);

  Eigen::MatrixXd z(t, 5);
  z.col(0).setOnes();
  z.col(1) = column(data.log_x1d);
  z.col(2) = column(data.log_x2d);
  z.col(3) = column(data.log_x1s);
  z.col(4) = column(data.log_x2s);

  SupplyFit out;
  out.fit = fit_2sls(column(data.log_p), x, z, {1});
  out.fit.regressor_names = {"const", "log_q", "log_x1s", "log_x2s"};
  out.fit.instrument_names = {"const", "log_x1d", "log_x2d", "log_x1s", "log_x2s"};
  out.fit.endogenous_names = {"log_q"};
  out.gamma_hat = out.fit.coefficients(0);
  return out;
}

ThetaEstimate recover_theta(double gamma_hat, double alpha0_hat) {
  ThetaEstimate est;
  est.gamma_hat = gamma_hat;
  est.alpha0_hat = alpha0_hat;
  est.valid = std::isfinite(gamma_hat) && std::isfinite(alpha0_hat) && std::abs(alpha0_hat) >= 1e-8;
  est.theta_hat = est.valid ? (std::exp(-gamma_hat) - 1.0) / alpha0_hat
                            : std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(est.theta_hat)) est.valid = false;
  return est;
}

}  // namespace conduct
