#include <doctest.h>

#include <cmath>
#include <vector>

#include "spg/harness.hpp"
#include "spg/oracle.hpp"
#include "spg/solver.hpp"

using spg::Vector;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

}  // namespace

TEST_CASE("spg_step formula") {
  spg::CompositeProblem quad;
  quad.smooth = spg::quadratic_term(vec1(0.0), 1.0);
  quad.reg = spg::zero_regularizer();
  CHECK(spg::spg_step(quad, vec1(4.0), vec1(4.0), 0.5, 1.0)[0] ==
        doctest::Approx(2.0));

  spg::CompositeProblem l1;
  l1.smooth = spg::quadratic_term(vec1(0.0), 1.0);
  l1.reg = spg::l1_regularizer(1.0);
  CHECK(spg::spg_step(l1, vec1(3.0), vec1(0.0), 1.0, 0.5)[0] ==
        doctest::Approx(2.5));

  // lambda = 0 leaves the iterate untouched
  CHECK(spg::spg_step(l1, vec1(3.0), vec1(17.0), 2.0, 0.0)[0] ==
        doctest::Approx(3.0));

  Vector bad(1);
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(spg::spg_step(l1, vec1(1.0), bad, 1.0, 1.0),
                    doctest::Contains("non-finite"));
}

TEST_CASE("noiseless SPG equals forward-backward bit for bit") {
  auto problem = spg::toy_problem(1.0);
  auto oracle = spg::additive_gaussian_oracle(problem.smooth, 0.0, 1);

  spg::SolverConfig config;
  config.schedule = spg::constant_schedule(0.9);
  config.iterations = 200;

  const auto spg_trace = spg::run_spg(problem, oracle, config, 1, vec1(0.0));
  const auto fb_trace = spg::run_forward_backward(problem, 0.9, 200, vec1(0.0));
  REQUIRE(spg_trace.snapshots.size() == fb_trace.snapshots.size());
  for (std::size_t i = 0; i < spg_trace.snapshots.size(); ++i) {
    CHECK(spg_trace.snapshots[i][0] == fb_trace.snapshots[i][0]);
  }
}

TEST_CASE("minimizer is a fixed point of the noiseless iteration") {
  auto problem = spg::toy_problem(1.0);
  auto oracle = spg::additive_gaussian_oracle(problem.smooth, 0.0, 1);
  spg::SolverConfig config;
  config.schedule = spg::power_schedule(0.5, 1.0);
  config.iterations = 50;
  const auto trace = spg::run_spg(problem, oracle, config, 1, vec1(10.0));
  for (const auto& w : trace.snapshots) CHECK(w[0] == doctest::Approx(10.0));
}

TEST_CASE("toy ensemble converges in seed mean") {
  spg::ToyParams params;
  params.mu = 1.0;
  params.schedule = spg::power_schedule(1.0, 1.0);
  params.noise_variance = 0.1;
  params.seeds = spg::make_seeds(100);
  params.iterations = 1000;
  params.force = true;
  const auto result = spg::run_toy(params);
  const double early = spg::mean_dist_at(result.traces, 10);
  const double late = spg::mean_dist_at(result.traces, 1001);
  CHECK(late < early);
  CHECK(late < 0.1);
}

TEST_CASE("forward-backward solves a quadratic in one exact step") {
  spg::CompositeProblem problem;
  problem.smooth = spg::quadratic_term(vec1(10.0), 1.0);
  problem.reg = spg::zero_regularizer();
  const auto trace = spg::run_forward_backward(problem, 1.0, 3, vec1(-5.0));
  CHECK(trace.snapshots[1][0] == doctest::Approx(10.0));
}

TEST_CASE("forward-backward fixed point of the toy problem is 10") {
  auto problem = spg::toy_problem(1.0);
  const auto trace = spg::run_forward_backward(problem, 1.0, 2000, vec1(0.0));
  CHECK(trace.final_point[0] == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("forward-backward limit satisfies the optimality condition") {
  // small elastic-net least squares instance
  spg::Rng rng(21);
  spg::Matrix design(8, 3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) design(i, j) = rng.next_gaussian();
  Vector targets(8);
  for (int i = 0; i < 8; ++i) targets[i] = rng.next_gaussian();

  spg::CompositeProblem problem;
  problem.smooth = spg::least_squares_term(design, targets, 0.0);
  const double omega = 0.05, nu = 0.1;
  problem.reg = spg::elastic_net_regularizer(omega, nu);

  const auto trace = spg::run_forward_backward(
      problem, 1.0 / problem.smooth.lipschitz_beta, 200000, Vector::Zero(3));
  const Vector w = trace.final_point;
  const Vector g = problem.smooth.gradient(w);
  // 0 in grad L(w) + nu w + omega * subdiff |.|(w), componentwise interval check
  for (int k = 0; k < 3; ++k) {
    const double r = -(g[k] + nu * w[k]);
    if (w[k] > 1e-9) {
      CHECK(r == doctest::Approx(omega).epsilon(1e-6));
    } else if (w[k] < -1e-9) {
      CHECK(r == doctest::Approx(-omega).epsilon(1e-6));
    } else {
      CHECK(std::abs(r) <= omega + 1e-6);
    }
  }
}

TEST_CASE("fobos_average two-term and brute-force checks") {
  spg::RunTrace trace;
  trace.iteration = {1, 2};
  trace.snapshots = {vec1(2.0), vec1(0.0)};
  const auto avg = spg::fobos_average(trace, 1.0);
  CHECK(avg[1][0] == doctest::Approx(4.0 / 3.0));

  // constant iterates average to themselves
  spg::RunTrace cst;
  for (int n = 1; n <= 20; ++n) {
    cst.iteration.push_back(n);
    cst.snapshots.push_back(vec1(3.25));
  }
  for (const auto& a : spg::fobos_average(cst, 2.0)) {
    CHECK(a[0] == doctest::Approx(3.25));
  }

  // running accumulator vs direct weighted sums on a random 50-step trace
  spg::Rng rng(5);
  spg::RunTrace rnd;
  for (int n = 1; n <= 50; ++n) {
    rnd.iteration.push_back(n);
    Vector w(3);
    for (int k = 0; k < 3; ++k) w[k] = rng.next_gaussian();
    rnd.snapshots.push_back(w);
  }
  const double c1 = 0.7;
  const auto run = spg::fobos_average(rnd, c1);
  double wsum = 0.0;
  Vector acc = Vector::Zero(3);
  for (int n = 1; n <= 50; ++n) {
    const double eta = c1 / n;
    wsum += eta;
    acc += eta * rnd.snapshots[n - 1];
    const Vector direct = acc / wsum;
    CHECK((run[n - 1] - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
  }

  spg::RunTrace empty;
  empty.iteration = {1};
  CHECK_THROWS(spg::fobos_average(empty, 1.0));
}

TEST_CASE("check_step_condition") {
  spg::VarianceCertificate zero_cert;
  zero_cert.sigma_sq = 0.0;
  zero_cert.alpha = 0.0;

  SUBCASE("constant step within the A3 bound") {
    const auto rep = spg::check_step_condition(spg::constant_schedule(0.5), 1.0,
                                               zero_cert, 0.4, 100);
    CHECK(rep.a3_satisfied);
    CHECK(rep.gamma_bound == doctest::Approx(0.6));
  }
  SUBCASE("1/n schedule passes the A4 surrogates") {
    const auto rep = spg::check_step_condition(spg::power_schedule(0.5, 1.0),
                                               1.0, zero_cert, 0.4, 1000);
    CHECK(rep.gamma_lambda_exponent == doctest::Approx(-1.0));
    CHECK(rep.chi_exponent == doctest::Approx(-2.0));
    CHECK(rep.sum_diverges);
    CHECK(rep.chi_summable);
    CHECK(rep.a4_satisfied);
  }
  SUBCASE("1/sqrt(n) fails the chi summability test") {
    const auto rep = spg::check_step_condition(spg::power_schedule(0.5, 0.5),
                                               1.0, zero_cert, 0.4, 1000);
    CHECK(rep.sum_diverges);
    CHECK_FALSE(rep.chi_summable);
    CHECK_FALSE(rep.a4_satisfied);
  }
  SUBCASE("A3 violation is located") {
    const auto rep = spg::check_step_condition(spg::constant_schedule(0.7), 1.0,
                                               zero_cert, 0.4, 100);
    CHECK_FALSE(rep.a3_satisfied);
    CHECK(rep.first_violation == 1);
  }
}

TEST_CASE("quasi-Fejer decrease in expectation on the toy problem") {
  // E||w_{n+1}-w||^2 - E||w_n-w||^2 <= 2 sigma^2 chi_n^2 with
  // chi_n^2 = gamma_n^2 here (lambda=1, alpha=0, grad L(w_ref)=0).
  const double sigma_sq = 0.01;
  spg::ToyParams params;
  params.mu = 1.0;
  params.schedule = spg::power_schedule(0.5, 1.0);
  params.noise_variance = sigma_sq;
  params.seeds = spg::make_seeds(200);
  params.iterations = 500;
  params.epsilon = 0.4;
  const auto result = spg::run_toy(params);

  const std::size_t records = result.traces.front().iteration.size();
  int ok = 0, total = 0;
  for (std::size_t i = 0; i + 1 < records && i < 500; ++i) {
    const int n = result.traces.front().iteration[i];
    const double gamma = params.schedule.gamma(n);
    const double chi_sq = gamma * gamma;
    double mean = 0.0, sq = 0.0;
    for (const auto& tr : result.traces) {
      const double d =
          tr.dist_to_ref[i + 1] * tr.dist_to_ref[i + 1] -
          tr.dist_to_ref[i] * tr.dist_to_ref[i] - 2.0 * sigma_sq * chi_sq;
      mean += d;
      sq += d * d;
    }
    const double m = static_cast<double>(result.traces.size());
    mean /= m;
    const double se = std::sqrt(std::max(0.0, sq / m - mean * mean) / m);
    ++total;
    if (mean <= 3.0 * se) ++ok;
  }
  CHECK(static_cast<double>(ok) / total >= 0.95);
}

TEST_CASE("iterates stay bounded on compliant toy runs") {
  spg::ToyParams params;
  params.mu = 1.0;
  params.schedule = spg::power_schedule(0.5, 1.0);
  params.noise_variance = 0.1;
  params.seeds = spg::make_seeds(50);
  params.iterations = 1000;
  const auto result = spg::run_toy(params);
  const double cap = 10.0 * (0.0 + 10.0 + 1.0);
  for (const auto& tr : result.traces) {
    for (const auto& w : tr.snapshots) CHECK(w.norm() < cap);
  }
}

TEST_CASE("divergence guard reports the failing step") {
  spg::CompositeProblem problem;
  problem.smooth = spg::quadratic_term(vec1(0.0), 1.0);
  problem.reg = spg::zero_regularizer();
  // gamma = 3 > 2/beta makes the quadratic iteration explode
  spg::GradientOracle oracle =
      spg::additive_gaussian_oracle(problem.smooth, 0.0, 1);
  spg::SolverConfig config;
  config.schedule = spg::constant_schedule(3.0);
  config.iterations = 1000;
  CHECK_THROWS_WITH(spg::run_spg(problem, oracle, config, 1, vec1(1.0)),
                    doctest::Contains("at step"));
}
