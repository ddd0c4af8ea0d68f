#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conduct/dgp.hpp"
#include "conduct/errors.hpp"
#include "conduct/estimation.hpp"
#include "conduct/rng.hpp"
#include "oracles.hpp"

#include <json.hpp>

using namespace conduct;

namespace {

Eigen::MatrixXd random_matrix(RandomStream& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.standard_normal();
  return m;
}

// Endogenous design: x depends on z and on the structural error.
struct Instance {
  Eigen::VectorXd y;
  Eigen::MatrixXd x, z;
};

Instance random_instance(RandomStream& rng, Eigen::Index t, Eigen::Index k, Eigen::Index m) {
  Instance in;
  in.z = random_matrix(rng, t, m);
  const Eigen::MatrixXd pi = random_matrix(rng, m, k);
  const Eigen::VectorXd u = random_matrix(rng, t, 1);
  in.x = in.z * pi + 0.5 * u * Eigen::RowVectorXd::Ones(k) + random_matrix(rng, t, k);
  const Eigen::VectorXd beta = random_matrix(rng, k, 1);
  in.y = in.x * beta + u;
  return in;
}

}  // namespace

TEST_CASE("fit_2sls trivial cases") {
  SUBCASE("self-instrumented exact fit") {
    Eigen::VectorXd x(5), y(5);
    x << 1, 2, 3, 4, 5;
    y = 2.0 * x;
    const auto fit = fit_2sls(y, x, x);
    CHECK(fit.coefficients(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.residuals.norm() < 1e-12);
  }
  SUBCASE("scalar IV ratio") {
    Eigen::VectorXd x(3), z(3), y(3);
    x << 1, 2, 3;
    z << 1, 1, 2;
    y << 2, 4, 6;
    const auto fit = fit_2sls(y, x, z);
    CHECK(fit.coefficients(0) == doctest::Approx(18.0 / 9.0).epsilon(1e-14));
  }
}

TEST_CASE("fit_2sls errors") {
  RandomStream rng(1);
  const Eigen::MatrixXd x = random_matrix(rng, 20, 2);
  const Eigen::VectorXd y = random_matrix(rng, 20, 1);

  Eigen::MatrixXd z = random_matrix(rng, 20, 3);
  z.col(2) = 2.0 * z.col(0) - z.col(1);
  CHECK_THROWS_AS(fit_2sls(y, x, z), RankDeficientError);

  Eigen::MatrixXd xc = x;
  xc.col(1) = 3.0 * xc.col(0);
  CHECK_THROWS_AS(fit_2sls(y, xc, random_matrix(rng, 20, 3)), RankDeficientError);

  CHECK_THROWS_AS(fit_2sls(y.head(3), x.topRows(3), random_matrix(rng, 3, 3)),
                  InsufficientDataError);
  CHECK_THROWS_AS(fit_2sls(y, x, random_matrix(rng, 20, 1)), RankDeficientError);
}

TEST_CASE("fit_2sls matches the extended-precision normal-equations oracle") {
  RandomStream rng(2);
  SUBCASE("200 x 2 overidentified") {
    const auto in = random_instance(rng, 200, 2, 4);
    const auto fit = fit_2sls(in.y, in.x, in.z);
    const auto ref = oracle::naive_2sls(in.y, in.x, in.z);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(fit.coefficients(j) - double(ref[j])) <= 1e-8);
  }
  SUBCASE("random shapes") {
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::Index k = 1 + rep % 4;
      const Eigen::Index m = k + 1 + rep % 3;
      const auto in = random_instance(rng, 30 + rep, k, m);
      const auto fit = fit_2sls(in.y, in.x, in.z);
      const auto ref = oracle::naive_2sls(in.y, in.x, in.z);
      for (Eigen::Index j = 0; j < k; ++j) CHECK(std::abs(fit.coefficients(j) - double(ref[j])) <= 1e-8);
    }
  }
}

TEST_CASE("exactly identified fit equals direct IV") {
  RandomStream rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index k = 1 + rep % 4;
    const auto in = random_instance(rng, 40, k, k);
    const auto fit = fit_2sls(in.y, in.x, in.z);
    const auto ref = oracle::direct_iv(in.y, in.x, in.z);
    for (Eigen::Index j = 0; j < k; ++j) CHECK(std::abs(fit.coefficients(j) - double(ref[j])) <= 1e-10);
  }
}

TEST_CASE("self-instrumented fit is OLS") {
  RandomStream rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd x = random_matrix(rng, 60, 3);
    const Eigen::VectorXd y = x * Eigen::Vector3d(1.0, -2.0, 0.5) + random_matrix(rng, 60, 1);
    const auto fit = fit_2sls(y, x, x);
    const Eigen::VectorXd ols = x.householderQr().solve(y);
    CHECK((fit.coefficients - ols).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("residuals are orthogonal to the projected regressors") {
  RandomStream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto in = random_instance(rng, 100, 3, 5);
    const auto fit = fit_2sls(in.y, in.x, in.z);
    CHECK((fit.residuals - (in.y - in.x * fit.coefficients)).norm() == 0.0);
    const Eigen::MatrixXd xhat = project_onto_instruments(in.x, in.z);
    const double scale = xhat.cwiseAbs().maxCoeff() * in.y.cwiseAbs().maxCoeff();
    CHECK((xhat.transpose() * fit.residuals).cwiseAbs().maxCoeff() <= 1e-8 * 100 * scale);
  }
}

TEST_CASE("first-stage R^2 is reported for endogenous columns") {
  RandomStream rng(6);
  const auto in = random_instance(rng, 300, 2, 3);
  const auto all = fit_2sls(in.y, in.x, in.z);
  CHECK(all.first_stage_r2.size() == 2);
  const auto one = fit_2sls(in.y, in.x, in.z, {1});
  REQUIRE(one.first_stage_r2.size() == 1);
  CHECK(one.first_stage_r2[0] == all.first_stage_r2[1]);
  CHECK(one.first_stage_r2[0] > 0.0);
  CHECK(one.first_stage_r2[0] < 1.0);
}

TEST_CASE("noise-free supply and demand recover the truth") {
  DgpConfig cfg;
  cfg.params.sigma = 0.0;
  cfg.sample_size = 200;
  cfg.seed = 17;
  const auto data = generate_dataset(cfg);

  const auto supply = estimate_supply(data);
  CHECK(supply.gamma_hat == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  for (int j = 1; j < 4; ++j) CHECK(std::abs(supply.fit.coefficients(j) - 1.0) <= 1e-8);

  const auto demand = estimate_demand(data);
  CHECK(std::abs(demand.coefficients(0) + 1.0) <= 1e-8);
  CHECK(std::abs(demand.coefficients(1) - 1.0) <= 1e-8);
  CHECK(std::abs(demand.coefficients(2) - 1.0) <= 1e-8);

  const auto theta = recover_theta(supply.gamma_hat, demand.coefficients(0));
  CHECK(theta.valid);
  CHECK(theta.theta_hat == doctest::Approx(0.5).epsilon(1e-7));

  const auto with_const = estimate_demand(data, {true});
  CHECK(with_const.coefficients.size() == 4);
  CHECK(std::abs(with_const.coefficients(0)) <= 1e-8);
  CHECK(std::abs(with_const.coefficients(1) + 1.0) <= 1e-8);
}

TEST_CASE("demand and supply need enough rows") {
  DgpConfig cfg;
  cfg.sample_size = 5;
  const auto five = generate_dataset(cfg);
  CHECK_NOTHROW(estimate_demand(five));
  CHECK_THROWS_AS(estimate_supply(five), InsufficientDataError);
  cfg.sample_size = 4;
  CHECK_THROWS_AS(estimate_demand(generate_dataset(cfg)), InsufficientDataError);
}

TEST_CASE("demand estimate converges at tiny noise") {
  DgpConfig cfg;
  cfg.params.sigma = 0.001;
  cfg.sample_size = 1000;
  double mean = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    cfg.seed = substream_seed(77, {s});
    mean += estimate_demand(generate_dataset(cfg)).coefficients(0);
  }
  mean /= 100.0;
  CHECK(std::abs(mean + 1.0) < 0.01);
}

TEST_CASE("recover_theta") {
  auto t = recover_theta(std::log(2.0), -1.0);
  CHECK(t.valid);
  CHECK(t.theta_hat == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(recover_theta(0.0, -1.0).theta_hat == 0.0);
  // (e^-0.6 - 1) / -0.9, evaluated at 30 digits
  CHECK(recover_theta(0.6, -0.9).theta_hat == doctest::Approx(0.50132040433997063).epsilon(1e-14));

  t = recover_theta(0.3, 1e-9);
  CHECK_FALSE(t.valid);
  CHECK(std::isnan(t.theta_hat));
  CHECK(t.gamma_hat == 0.3);
}

TEST_CASE("recover_theta inverts supply_intercept") {
  for (double theta = 0.0; theta <= 1.0; theta += 0.05) {
    for (double a0 = -2.0; a0 <= -0.1; a0 += 0.05) {
      if (1.0 + theta * a0 <= 1e-3) continue;
      const auto est = recover_theta(supply_intercept(theta, a0), a0);
      CHECK(est.valid);
      CHECK(std::abs(est.theta_hat - theta) <= 1e-12);
    }
  }
}

TEST_CASE("fit JSON record") {
  DgpConfig cfg;
  cfg.sample_size = 30;
  const auto fit = estimate_demand(generate_dataset(cfg));
  const auto j = nlohmann::json::parse(fit_to_json(fit));
  CHECK(j["regressors"].size() == 3);
  CHECK(j["instruments"].size() == 4);
  CHECK(j["n_obs"] == 30);
  CHECK(j["coefficients"][0].get<double>() == fit.coefficients(0));
  CHECK(j["first_stage_r2"].contains("log_q"));
}
