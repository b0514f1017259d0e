#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spg/solver.hpp"

namespace spg {

// phi_c(t) = (t^c - 1)/c for c != 0, log t at c = 0; continuous in c.
inline double phi(double c, double t) {
  if (!(t > 0.0)) throw std::domain_error("phi: t must be > 0");
  if (std::abs(c) < 1e-12) return std::log(t);
  return std::expm1(c * std::log(t)) / c;
}

// Constants of the non-asymptotic convergence bound for the schedule
// gamma_n = c1 * n^-theta under strong convexity mu + nu > 0.
struct BoundParams {
  double theta = 1.0;
  double c1 = 1.0;
  double lambda_inf = 1.0;
  double alpha_sup = 0.0;
  double sigma_sq = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double epsilon = 0.5;
  double grad_at_sol_norm = 0.0;
  // Derived:
  double t = 0.0;    // 1 - 2^(theta-1)
  double c = 0.0;    // 2 c1 lambda_inf (nu + mu*eps) / (1+nu)^2
  double tau = 0.0;  // 2 sigma^2 c1^2 (1 + alpha_sup ||grad L(w_ref)||) / c^2
  int n0 = 2;
  double s_n0 = 0.0;  // E||w_{n0} - w_ref||^2, supplied or estimated
};

// Smallest integer n0 >= 2 with max{c, c1} * n0^-theta <= 1.
inline int smallest_valid_n0(double c, double c1, double theta) {
  const double m = std::max(c, c1);
  int n0 = 2;
  if (m > 1.0) {
    n0 = std::max(2, static_cast<int>(std::ceil(std::pow(m, 1.0 / theta))));
  }
  while (m * std::pow(static_cast<double>(n0), -theta) > 1.0) ++n0;
  return n0;
}

inline BoundParams theorem1_constants(double theta, double c1,
                                      double lambda_inf, double alpha_sup,
                                      double sigma_sq, double mu, double nu,
                                      double epsilon,
                                      double grad_at_sol_norm) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must be in (0,1]");
  }
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be > 0");
  if (!(lambda_inf > 0.0)) throw std::invalid_argument("lambda_inf must be > 0");
  if (alpha_sup < 0.0) throw std::invalid_argument("alpha_sup must be >= 0");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("sigma_sq must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must be in (0,1)");
  }
  if (mu < 0.0 || nu < 0.0 || mu + nu <= 0.0) {
    throw std::invalid_argument("strong convexity required: mu + nu > 0");
  }
  BoundParams p;
  p.theta = theta;
  p.c1 = c1;
  p.lambda_inf = lambda_inf;
  p.alpha_sup = alpha_sup;
  p.sigma_sq = sigma_sq;
  p.mu = mu;
  p.nu = nu;
  p.epsilon = epsilon;
  p.grad_at_sol_norm = grad_at_sol_norm;
  p.t = 1.0 - std::pow(2.0, theta - 1.0);
  p.c = 2.0 * c1 * lambda_inf * (nu + mu * epsilon) / ((1.0 + nu) * (1.0 + nu));
  p.tau = 2.0 * sigma_sq * c1 * c1 * (1.0 + alpha_sup * grad_at_sol_norm) /
          (p.c * p.c);
  p.n0 = smallest_valid_n0(p.c, c1, theta);
  return p;
}

// Right-hand side of the non-asymptotic bound on s_{n+1} = E||w_{n+1}-w_ref||^2,
// as stated for the schedule gamma_n = c1 n^-theta (both theta branches).
inline double theorem1_bound(const BoundParams& p, long long n) {
  if (n < 2LL * p.n0) {
    throw std::invalid_argument("bound valid only for n >= 2*n0");
  }
  const double nd = static_cast<double>(n);
  if (p.theta == 1.0) {
    return p.s_n0 * std::pow(p.n0 / (nd + 1.0), p.c) +
           std::pow(2.0, p.c) * p.tau * p.c * p.c *
               phi(p.c - 1.0, nd) / std::pow(nd + 1.0, p.c);
  }
  const double omt = 1.0 - p.theta;
  const double decay = std::exp(-p.c * p.t * std::pow(nd + 1.0, omt) / omt);
  const double head =
      (p.tau * p.c * p.c * phi(1.0 - 2.0 * p.theta, nd) +
       p.s_n0 * std::exp(p.c * p.n0 / omt)) * decay;
  return head + std::pow(2.0, p.theta) * p.tau * p.c / std::pow(nd - 2.0, p.theta);
}

// Closed-form specialization for theta = 1, lambda = 1, c = 2:
// s_n <= n0^2 s_{n0} / (n+1)^2 + 8 sigma^2 (1+alpha ||g||)(1+nu)^4 / (lambda^2 (mu eps + nu)^2).
inline double corollary1_bound(const BoundParams& p, long long n) {
  const double nd = static_cast<double>(n);
  const double denom = p.lambda_inf * (p.mu * p.epsilon + p.nu);
  const double noise = 8.0 * p.sigma_sq *
                       (1.0 + p.alpha_sup * p.grad_at_sol_norm) *
                       std::pow(1.0 + p.nu, 4) / (denom * denom);
  return p.s_n0 * p.n0 * static_cast<double>(p.n0) / ((nd + 1.0) * (nd + 1.0)) +
         noise;
}

// Bound on s_{n+1} for the scalar recursion s_{n+1} <= (1-eta_n) s_n + tau eta_n^2
// with eta_n = c n^-alpha, started from s_{n0}. Both alpha branches as stated
// (note the (1+1/n0)^c factor in the alpha = 1 branch, and the
// exp(c n0^{1-alpha}/(1-alpha)) factor for alpha < 1).
inline double lemma_a2_bound(double alpha, double c, double tau, double s_n0,
                             int n0, long long n) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in (0,1]");
  }
  if (!(c > 0.0) || !(tau >= 0.0) || s_n0 < 0.0) {
    throw std::invalid_argument("invalid lemma parameters");
  }
  if (c * std::pow(static_cast<double>(n0), -alpha) > 1.0) {
    throw std::invalid_argument("n0 too small: eta_n0 > 1");
  }
  if (n < 2LL * n0) {
    throw std::invalid_argument("bound valid only for n >= 2*n0");
  }
  const double nd = static_cast<double>(n);
  if (alpha == 1.0) {
    return s_n0 * std::pow(n0 / (nd + 1.0), c) +
           tau * c * c / std::pow(nd + 1.0, c) *
               std::pow(1.0 + 1.0 / n0, c) * phi(c - 1.0, nd);
  }
  const double oma = 1.0 - alpha;
  const double t = 1.0 - std::pow(2.0, alpha - 1.0);
  const double decay = std::exp(-c * t * std::pow(nd + 1.0, oma) / oma);
  const double head =
      (tau * c * c * phi(1.0 - 2.0 * alpha, nd) +
       s_n0 * std::exp(c * std::pow(static_cast<double>(n0), oma) / oma)) * decay;
  return head + tau * std::pow(2.0, alpha) * c / std::pow(nd - 2.0, alpha);
}

// Least-squares slope of log(mean squared distance) vs log n over the window.
inline double empirical_rate(const std::vector<RunTrace>& ensemble, int n_lo,
                             int n_hi) {
  if (ensemble.size() < 30) {
    throw std::invalid_argument("need at least 30 seeds");
  }
  if (n_lo < 1 || n_hi <= n_lo) throw std::invalid_argument("bad window");

  const RunTrace& first = ensemble.front();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < first.iteration.size(); ++i) {
    const int n = first.iteration[i];
    if (n < n_lo || n > n_hi) continue;
    double mean_sq = 0.0;
    for (const auto& tr : ensemble) {
      const double d = tr.dist_to_ref[i];
      mean_sq += d * d;
    }
    mean_sq /= static_cast<double>(ensemble.size());
    if (!(mean_sq > 0.0)) throw std::runtime_error("degenerate window");
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(mean_sq));
  }
  if (xs.size() < 2) throw std::invalid_argument("window has fewer than 2 records");

  const double m = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace spg
