// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "conduct/cli.hpp"
#include "conduct/errors.hpp"
#include "conduct/estimation.hpp"
#include "conduct/identlab.hpp"
#include "conduct/model.hpp"
#include "conduct/montecarlo.hpp"
#include "conduct/rng.hpp"
#include "oracles.hpp"

using namespace conduct;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double value, double target, double rel) {
  return std::abs(value - target) <= rel * target;
}

const McSummary& cell(const std::vector<McSummary>& all, double sigma, std::size_t t) {
  for (const auto& s : all) {
    if (s.sigma == sigma && s.sample_size == t) return s;
  }
  throw std::runtime_error("missing cell");
}

void criterion_1_and_2_and_3() {
  ExperimentGrid grid;  // design defaults: 3 sigmas x 4 sizes x 1000 reps
  grid.keep_draws = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto all = run_grid(grid);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("default grid: %zu cells, %zu reps each, %.1f s\n", all.size(), grid.n_reps, secs);
  std::printf("%s", render_table(all, TableFormat::markdown).c_str());

  // 1. sigma = 1.0 reference values
  const auto& big = cell(all, 1.0, 1000);
  const auto& mid = cell(all, 1.0, 200);
  const double th_rmse = big[Parameter::theta].rmse, th_bias = big[Parameter::theta].bias;
  const double a0_rmse = big[Parameter::alpha0].rmse, b0_rmse = big[Parameter::beta0].rmse;
  const double th200 = mid[Parameter::theta].rmse;
  const bool c1 = within(th_rmse, 0.075, 0.20) && std::abs(th_bias) <= 0.02 &&
                  within(a0_rmse, 0.096, 0.20) && within(b0_rmse, 0.147, 0.20) &&
                  within(th200, 0.195, 0.25);
  report(1, c1,
         fmt("T=1000: RMSE(theta)=%.4f [0.060,0.090], bias(theta)=%.4f [|.|<=0.02], "
             "RMSE(alpha0)=%.4f [0.0768,0.1152]",
             th_rmse, th_bias, a0_rmse) +
             fmt(", RMSE(beta0)=%.4f [0.1176,0.1764]; T=200: RMSE(theta)=%.4f [0.146,0.244]; "
                 "%.1f s",
                 b0_rmse, th200, secs));

  // 2. ordering
  bool c2 = true;
  std::string why;
  for (double sigma : grid.sigmas) {
    for (std::size_t j = 1; j < grid.sample_sizes.size(); ++j) {
      const double prev = cell(all, sigma, grid.sample_sizes[j - 1])[Parameter::theta].rmse;
      const double cur = cell(all, sigma, grid.sample_sizes[j])[Parameter::theta].rmse;
      if (!(cur < prev)) {
        c2 = false;
        why += fmt(" T-order broken at sigma=%g, T=%g", sigma, double(grid.sample_sizes[j]));
      }
    }
  }
  for (std::size_t t : grid.sample_sizes) {
    for (std::size_t i = 1; i < grid.sigmas.size(); ++i) {
      const double prev = cell(all, grid.sigmas[i - 1], t)[Parameter::theta].rmse;
      const double cur = cell(all, grid.sigmas[i], t)[Parameter::theta].rmse;
      if (!(cur > prev)) {
        c2 = false;
        why += fmt(" sigma-order broken at T=%g, sigma=%g", double(t), grid.sigmas[i]);
      }
    }
  }
  std::string rmse_row = "RMSE(theta) by sigma x T:";
  for (const auto& s : all) rmse_row += fmt(" %.4g", s[Parameter::theta].rmse);
  report(2, c2, rmse_row + why);

  // 3. noise floor
  const auto& tiny = cell(all, 0.001, 1000);
  double worst = 0.0, mean_abs = 0.0;
  std::size_t n = 0;
  bool every = tiny.n_invalid == 0;
  for (const auto& r : tiny.draws) {
    const double dev = std::abs(r.estimate[static_cast<std::size_t>(Parameter::theta)] - 0.5);
    if (!r.valid || !(dev < 0.01)) every = false;
    worst = std::max(worst, dev);
    mean_abs += dev;
    ++n;
  }
  mean_abs /= static_cast<double>(n);
  report(3, every && mean_abs < 0.002,
         fmt("sigma=0.001, T=1000: max |theta-0.5|=%.2e [<0.01], mean |theta-0.5|=%.2e [<0.002], "
             "invalid=%g",
             worst, mean_abs, double(tiny.n_invalid)));
}

void criterion_4() {
  RandomStream rng(404);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    StructuralParams p;
    p.alpha0 = rng.uniform(-2.0, -0.1);
    p.alpha1 = rng.uniform(-1.5, 1.5);
    p.alpha2 = rng.uniform(-1.5, 1.5);
    p.beta0 = rng.uniform(0.1, 2.0);
    p.beta1 = rng.uniform(-1.5, 1.5);
    p.beta2 = rng.uniform(-1.5, 1.5);
    p.theta = rng.uniform(0.0, std::min(1.0, 0.9 / -p.alpha0));
    p.sigma = rng.uniform(0.0, 1.0);
    ExogenousDraw d;
    d.x1d = rng.uniform(1.0, 3.0);
    d.x2d = rng.uniform(1.0, 3.0);
    d.x1s = rng.uniform(1.0, 3.0);
    d.x2s = rng.uniform(1.0, 3.0);
    d.eps_d = rng.normal(p.sigma);
    d.eps_s = rng.normal(p.sigma);
    const double diff =
        std::abs(solve_equilibrium(p, d).log_q - oracle::bisect_equilibrium_log_q(p, d));
    worst = std::max(worst, diff);
  }
  report(4, worst <= 1e-8, fmt("max |log_q closed form - bisection| = %.2e [<=1e-8] over 100", worst));
}

Eigen::MatrixXd gaussian(RandomStream& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.standard_normal();
  return m;
}

void criterion_5() {
  RandomStream rng(505);
  double worst_over = 0.0, worst_exact = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    for (const bool exact : {false, true}) {
      const Eigen::Index k = 1 + rep % 4;
      const Eigen::Index m = exact ? k : k + 1 + rep % 3;
      const Eigen::Index t = 50 + 2 * rep;
      const Eigen::MatrixXd z = gaussian(rng, t, m);
      const Eigen::VectorXd u = gaussian(rng, t, 1);
      const Eigen::MatrixXd x =
          z * gaussian(rng, m, k) + 0.5 * u * Eigen::RowVectorXd::Ones(k) + gaussian(rng, t, k);
      const Eigen::VectorXd y = x * gaussian(rng, k, 1) + u;
      const auto fit = fit_2sls(y, x, z);
      const auto ref = exact ? oracle::direct_iv(y, x, z) : oracle::naive_2sls(y, x, z);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double diff = std::abs(fit.coefficients(j) - static_cast<double>(ref[j]));
        (exact ? worst_exact : worst_over) = std::max(exact ? worst_exact : worst_over, diff);
      }
    }
  }
  report(5, worst_over <= 1e-8 && worst_exact <= 1e-10,
         fmt("overidentified max diff %.2e [<=1e-8]; exactly identified max diff %.2e [<=1e-10]",
             worst_over, worst_exact));
}

void criterion_6() {
  const StructuralParams p;
  const auto sep = check_separability(power_demand(p), 2.0, 1.5, 2.5);
  const DemandFunction rotation = [](double q, double z, double y) {
    return 10.0 + (-1.0 + 1.0 * z) * q + 1.0 * y;
  };
  const auto rot = check_separability(rotation, 2.0, 1.5, 2.5);
  const bool lau_default = lau_exception_check(-1.0, 0.5);
  const bool lau_exact = lau_exception_check(-1.0, 1.0);
  const bool ok = sep.separable && std::abs(sep.derivative) <= 1e-6 * (1.0 + std::abs(sep.ratio)) &&
                  !rot.separable && std::abs(rot.derivative - 1.0) <= 1e-3 && !lau_default &&
                  lau_exact;
  report(6, ok,
         fmt("power demand d/dQ ratio = %.2e (separable); rotation witness = %.6f (~1); ",
             sep.derivative, rot.derivative) +
             "lau(-1,0.5)=" + (lau_default ? "true" : "false") +
             " lau(-1,1)=" + (lau_exact ? "true" : "false"));
}

void criterion_7() {
  RandomStream rng(707);
  double worst = 0.0;
  bool all_identical = true;
  for (int i = 0; i < 10; ++i) {
    const double ta = rng.uniform01();
    double tb = rng.uniform01();
    if (tb == ta) tb = 1.0 - ta;
    const double a = rng.uniform(0.2, 3.0);
    const LinearCost cost{rng.uniform(-1.0, 2.0), rng.uniform(0.5, 3.0), rng.uniform(0.0, 2.0)};
    const auto rep =
        demonstrate_nonidentification(build_equivalent_pair(ta, tb, a, cost), 1000, 7000 + i);
    worst = std::max({worst, rep.max_rel_q, rep.max_rel_p});
    all_identical = all_identical && rep.identical;
  }
  auto broken = build_equivalent_pair(0.2, 0.5, 1.0, LinearCost{1.0, 1.0, 1.0});
  broken.model_b.cost.c1 += 0.01;
  const auto neg = demonstrate_nonidentification(broken, 1000, 77);
  report(7, all_identical && worst <= 1e-12 && neg.max_abs_q > 1e-3,
         fmt("10 pairs x 1000 points: max relative discrepancy %.2e [<=1e-12]; "
             "perturbed control max |dQ| = %.3e [>1e-3]",
             worst, neg.max_abs_q));
}

std::string run_cli(const std::vector<std::string>& args, const char* threads) {
  if (threads != nullptr) setenv("CONDUCT_NUM_THREADS", threads, 1);
  else unsetenv("CONDUCT_NUM_THREADS");
  std::vector<const char*> argv{"conductlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) return "exit " + std::to_string(code) + ": " + err.str();
  return out.str();
}

void criterion_8() {
  const std::vector<std::string> args{"montecarlo", "--reps", "200", "--format", "csv"};
  const std::string first = run_cli(args, nullptr);
  const std::string second = run_cli(args, nullptr);
  const std::string one = run_cli(args, "1");
  const std::string four = run_cli(args, "4");
  unsetenv("CONDUCT_NUM_THREADS");
  const bool ok = !first.empty() && first.rfind("sigma,", 0) == 0 && first == second &&
                  first == one && one == four;
  report(8, ok, fmt("montecarlo csv (%g bytes) identical across repeat runs and workers {1,4}",
                    double(first.size())));
}

}  // namespace

int main() {
  try {
    criterion_1_and_2_and_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
