#include <doctest.h>

#include <cmath>
#include <vector>

#include "spg/oracle.hpp"
#include "spg/problem.hpp"

using spg::Vector;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

spg::SmoothTerm linear_gradient_term(double slope, int d) {
  spg::SmoothTerm t;
  t.value = [slope](const Vector& w) { return 0.5 * slope * w.squaredNorm(); };
  t.gradient = [slope](const Vector& w) -> Vector { return slope * w; };
  t.lipschitz_beta = slope;
  t.strong_mu = slope;
  t.dimension = d;
  return t;
}

}  // namespace

TEST_CASE("additive oracle: exact in the zero-noise limit") {
  auto smooth = spg::quadratic_term(vec1(10.0), 1.0);
  auto oracle = spg::additive_gaussian_oracle(smooth, 0.0, 5);
  spg::Rng rng = oracle.make_stream();
  const Vector w = vec1(3.0);
  CHECK((oracle.estimate(w, 1, rng) - smooth.gradient(w)).norm() == 0.0);
}

TEST_CASE("additive oracle: fixed seed reproduces the sample path") {
  auto smooth = spg::quadratic_term(vec1(0.0), 1.0);
  auto a = spg::additive_gaussian_oracle(smooth, 0.5, 99);
  auto b = spg::additive_gaussian_oracle(smooth, 0.5, 99);
  spg::Rng ra = a.make_stream(), rb = b.make_stream();
  for (int i = 0; i < 100; ++i) {
    CHECK((a.estimate(vec1(1.0), i, ra) - b.estimate(vec1(1.0), i, rb)).norm() ==
          0.0);
  }
}

TEST_CASE("additive oracle: empirical variance matches noise_std^2") {
  auto smooth = spg::quadratic_term(vec1(0.0), 1.0);
  auto oracle = spg::additive_gaussian_oracle(smooth, 0.1, 123);
  spg::Rng rng = oracle.make_stream();
  const Vector w = vec1(2.0);
  const Vector g = smooth.gradient(w);
  const int m = 100000;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += (oracle.estimate(w, i, rng) - g).squaredNorm();
  CHECK(acc / m == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("finite_sum oracle: mean of components") {
  std::vector<spg::SmoothTerm> comps{linear_gradient_term(1.0, 1),
                                     linear_gradient_term(3.0, 1)};
  auto oracle = spg::finite_sum_oracle(comps, 77);
  const Vector w = vec1(1.0);
  CHECK(oracle.exact_gradient(w)[0] == doctest::Approx(2.0));

  spg::Rng rng = oracle.make_stream();
  const int m = 100000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const double g = oracle.estimate(w, i, rng)[0];
    mean += g;
    sq += g * g;
  }
  mean /= m;
  const double sd = std::sqrt(sq / m - mean * mean);
  CHECK(std::abs(mean - 2.0) <= 3.0 * sd / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("finite_sum oracle: single component is deterministic") {
  std::vector<spg::SmoothTerm> comps{linear_gradient_term(2.0, 1)};
  auto oracle = spg::finite_sum_oracle(comps, 1);
  spg::Rng rng = oracle.make_stream();
  CHECK(oracle.estimate(vec1(4.0), 1, rng)[0] == doctest::Approx(8.0));
  CHECK_THROWS(spg::finite_sum_oracle({}, 1));
}

TEST_CASE("estimate_certificate on the additive oracle") {
  auto smooth = spg::quadratic_term(vec1(0.0), 1.0);
  auto oracle = spg::additive_gaussian_oracle(smooth, 0.1, 31);
  std::vector<Vector> probes;
  for (int i = 0; i < 8; ++i) probes.push_back(vec1(-4.0 + i));
  const auto cert = spg::estimate_certificate(oracle, probes, 20000);
  CHECK(cert.sigma_sq == doctest::Approx(0.01).epsilon(0.15));
  CHECK(cert.alpha <= 0.05);
}

TEST_CASE("estimate_certificate floors at 1e-12 for noiseless oracles") {
  auto smooth = spg::quadratic_term(vec1(0.0), 1.0);
  auto zero_noise = spg::additive_gaussian_oracle(smooth, 0.0, 3);
  std::vector<Vector> probes{vec1(1.0), vec1(-2.0)};
  CHECK(spg::estimate_certificate(zero_noise, probes, 1000).sigma_sq ==
        doctest::Approx(1e-12));

  // finite sum with identical components has zero variance as well
  std::vector<spg::SmoothTerm> comps{linear_gradient_term(1.0, 1),
                                     linear_gradient_term(1.0, 1)};
  auto fs = spg::finite_sum_oracle(comps, 4);
  CHECK(spg::estimate_certificate(fs, probes, 1000).sigma_sq ==
        doctest::Approx(1e-12));
}

TEST_CASE("estimate_certificate input validation") {
  auto smooth = spg::quadratic_term(vec1(0.0), 1.0);
  auto oracle = spg::additive_gaussian_oracle(smooth, 0.1, 1);
  CHECK_THROWS(spg::estimate_certificate(oracle, {}, 2000));
  CHECK_THROWS(spg::estimate_certificate(oracle, {vec1(0.0)}, 10));
}
