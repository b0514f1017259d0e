#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "spg/problem.hpp"
#include "spg/rng.hpp"

namespace spg {

// Witness of condition (A2): E||G - grad L(w)||^2 <= sigma^2 (1 + alpha ||grad L(w)||^2).
struct VarianceCertificate {
  double sigma_sq = 0.0;
  double alpha = 0.0;
};

// sigma^2 floor used when a certificate is estimated for a (near-)noiseless
// oracle; keeps the A3 step bound finite.
inline constexpr double kSigmaSqFloor = 1e-12;

// Stochastic gradient estimator. The RNG stream is owned by the caller (one
// stream per solver run); base_seed seeds standalone sampling, e.g. in
// estimate_certificate.
struct GradientOracle {
  std::function<Vector(const Vector&, int, Rng&)> estimate;
  VarianceCertificate certificate;
  std::function<Vector(const Vector&)> exact_gradient;
  int dimension = 0;
  std::uint64_t base_seed = 0;

  Rng make_stream() const { return Rng(base_seed); }
};

// G = grad L(w) + i.i.d. N(0, noise_std^2) per component. noise_std == 0 is
// the exact-gradient degenerate case (no draws consumed).
inline GradientOracle additive_gaussian_oracle(const SmoothTerm& smooth,
                                               double noise_std,
                                               std::uint64_t seed) {
  if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
  GradientOracle o;
  o.dimension = smooth.dimension;
  o.base_seed = seed;
  o.exact_gradient = smooth.gradient;
  auto grad = smooth.gradient;
  const int dim = smooth.dimension;
  if (noise_std == 0.0) {
    o.estimate = [grad](const Vector& w, int, Rng&) { return grad(w); };
  } else {
    o.estimate = [grad, noise_std, dim](const Vector& w, int, Rng& rng) {
      Vector g = grad(w);
      for (int i = 0; i < dim; ++i) g[i] += noise_std * rng.next_gaussian();
      return g;
    };
  }
  o.certificate.sigma_sq =
      std::max(kSigmaSqFloor, dim * noise_std * noise_std);
  o.certificate.alpha = 0.0;  // additive noise: bound holds with alpha = 0
  return o;
}

// Incremental oracle for L = (1/m) sum_i L_i: each call returns the gradient
// of one component drawn uniformly.
inline GradientOracle finite_sum_oracle(const std::vector<SmoothTerm>& components,
                                        std::uint64_t seed) {
  if (components.empty()) throw std::invalid_argument("empty component list");
  const int dim = components.front().dimension;
  for (const auto& c : components) {
    if (c.dimension != dim) {
      throw std::invalid_argument("components must share one dimension");
    }
  }
  std::vector<std::function<Vector(const Vector&)>> grads;
  grads.reserve(components.size());
  for (const auto& c : components) grads.push_back(c.gradient);

  GradientOracle o;
  o.dimension = dim;
  o.base_seed = seed;
  o.exact_gradient = [grads](const Vector& w) -> Vector {
    Vector g = Vector::Zero(w.size());
    for (const auto& gi : grads) g += gi(w);
    return g / static_cast<double>(grads.size());
  };
  const std::uint64_t m = grads.size();
  if (m == 1) {
    auto g0 = grads.front();
    o.estimate = [g0](const Vector& w, int, Rng&) { return g0(w); };
  } else {
    o.estimate = [grads, m](const Vector& w, int, Rng& rng) {
      return grads[static_cast<std::size_t>(rng.next_index(m))](w);
    };
  }
  // Placeholder certificate; callers needing (A2) constants for this oracle
  // should run estimate_certificate.
  o.certificate.sigma_sq = kSigmaSqFloor;
  o.certificate.alpha = 0.0;
  return o;
}

// Fits (sigma^2, alpha) so that (A2) holds on all probe points with 10%
// slack. alpha comes from a least-squares fit of the empirical variance
// against ||grad L||^2, floored at 0; sigma^2 is then the smallest feasible
// value, floored at kSigmaSqFloor.
inline VarianceCertificate estimate_certificate(
    const GradientOracle& oracle, const std::vector<Vector>& probe_points,
    int samples) {
  if (probe_points.empty()) throw std::invalid_argument("no probe points");
  if (samples < 1000) throw std::invalid_argument("samples must be >= 1000");

  Rng rng = oracle.make_stream();
  std::vector<double> var(probe_points.size());
  std::vector<double> gradsq(probe_points.size());
  for (std::size_t p = 0; p < probe_points.size(); ++p) {
    const Vector& w = probe_points[p];
    const Vector g = oracle.exact_gradient(w);
    gradsq[p] = g.squaredNorm();
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
      const Vector gs = oracle.estimate(w, s + 1, rng);
      if (!gs.allFinite()) {
        throw std::runtime_error("oracle produced non-finite sample");
      }
      acc += (gs - g).squaredNorm();
    }
    var[p] = acc / samples;
  }

  // Least squares v ~ a + b*g with a = sigma^2 and b = sigma^2 * alpha.
  const std::size_t np = probe_points.size();
  double sg = 0.0, sv = 0.0, sgg = 0.0, sgv = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    sg += gradsq[p];
    sv += var[p];
    sgg += gradsq[p] * gradsq[p];
    sgv += gradsq[p] * var[p];
  }
  const double denom = np * sgg - sg * sg;
  double a = sv / np, b = 0.0;
  if (denom > 0.0) {
    b = (np * sgv - sg * sv) / denom;
    a = (sv - b * sg) / np;
  }
  double alpha = (a > 0.0 && b > 0.0) ? b / a : 0.0;

  double sigma_sq = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    sigma_sq = std::max(sigma_sq, var[p] / (1.0 + alpha * gradsq[p]));
  }
  VarianceCertificate cert;
  cert.sigma_sq = std::max(kSigmaSqFloor, 1.1 * sigma_sq);
  cert.alpha = alpha;
  return cert;
}

}  // namespace spg
