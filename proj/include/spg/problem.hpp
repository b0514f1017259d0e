#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace spg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string("non-finite input: ") + what);
  }
}

// Smooth convex term L with beta-Lipschitz gradient and strong convexity
// modulus mu (mu = 0 means merely convex).
struct SmoothTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz_beta = 0.0;
  double strong_mu = 0.0;
  int dimension = 0;
};

// Proximable term R. value may return +inf (indicator functions).
struct Regularizer {
  std::function<Vector(const Vector&, double)> prox;  // prox_{gamma R}
  std::function<double(const Vector&)> value;
  double strong_nu = 0.0;
};

struct CompositeProblem {
  SmoothTerm smooth;
  Regularizer reg;
  std::optional<Vector> reference_solution;

  double objective(const Vector& w) const {
    return smooth.value(w) + reg.value(w);
  }

  void require_strong_convexity() const {
    if (smooth.strong_mu + reg.strong_nu <= 0.0) {
      throw std::invalid_argument("strong convexity required: mu + nu > 0");
    }
  }
};

// ---------------------------------------------------------------------------
// Proximity operators
// ---------------------------------------------------------------------------

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline Vector prox_l1(const Vector& z, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
  require_finite(z, "prox_l1");
  Vector p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    p[i] = soft_threshold(z[i], threshold);
  }
  return p;
}

// prox of gamma * (omega ||.||_1 + (nu/2) ||.||^2): soft-threshold by
// gamma*omega, then shrink by 1/(1 + gamma*nu).
inline Vector prox_elastic_net(const Vector& z, double gamma, double omega,
                               double nu) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (omega < 0.0 || nu < 0.0) {
    throw std::invalid_argument("omega and nu must be >= 0");
  }
  require_finite(z, "prox_elastic_net");
  const double t = gamma * omega;
  const double shrink = 1.0 / (1.0 + gamma * nu);
  Vector p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    p[i] = soft_threshold(z[i], t) * shrink;
  }
  return p;
}

inline Vector prox_box(const Vector& z, const Vector& lower,
                       const Vector& upper) {
  if (z.size() != lower.size() || z.size() != upper.size()) {
    throw std::invalid_argument("dimension mismatch in prox_box");
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (lower[i] > upper[i]) throw std::invalid_argument("empty box");
  }
  require_finite(z, "prox_box");
  return z.cwiseMax(lower).cwiseMin(upper);
}

// ---------------------------------------------------------------------------
// Built-in regularizers
// ---------------------------------------------------------------------------

inline Regularizer zero_regularizer() {
  Regularizer r;
  r.prox = [](const Vector& z, double) { return z; };
  r.value = [](const Vector&) { return 0.0; };
  r.strong_nu = 0.0;
  return r;
}

inline Regularizer l1_regularizer(double omega) {
  Regularizer r;
  r.prox = [omega](const Vector& z, double gamma) {
    return prox_l1(z, gamma * omega);
  };
  r.value = [omega](const Vector& w) { return omega * w.lpNorm<1>(); };
  r.strong_nu = 0.0;
  return r;
}

// omega ||w||_1 + (nu/2) ||w||^2
inline Regularizer elastic_net_regularizer(double omega, double nu) {
  Regularizer r;
  r.prox = [omega, nu](const Vector& z, double gamma) {
    return prox_elastic_net(z, gamma, omega, nu);
  };
  r.value = [omega, nu](const Vector& w) {
    return omega * w.lpNorm<1>() + 0.5 * nu * w.squaredNorm();
  };
  r.strong_nu = nu;
  return r;
}

// omega ||w - center||_1 + (nu/2) ||w - center||^2; prox by translation.
inline Regularizer shifted_elastic_net_regularizer(const Vector& center,
                                                   double omega, double nu) {
  Regularizer r;
  r.prox = [center, omega, nu](const Vector& z, double gamma) -> Vector {
    return center + prox_elastic_net(z - center, gamma, omega, nu);
  };
  r.value = [center, omega, nu](const Vector& w) {
    const Vector d = w - center;
    return omega * d.lpNorm<1>() + 0.5 * nu * d.squaredNorm();
  };
  r.strong_nu = nu;
  return r;
}

// Indicator of the box [lower, upper].
inline Regularizer box_regularizer(const Vector& lower, const Vector& upper) {
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw std::invalid_argument("empty box");
  }
  Regularizer r;
  r.prox = [lower, upper](const Vector& z, double) {
    return prox_box(z, lower, upper);
  };
  r.value = [lower, upper](const Vector& w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] < lower[i] || w[i] > upper[i]) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return 0.0;
  };
  r.strong_nu = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Smooth terms
// ---------------------------------------------------------------------------

// (mu/2) ||w - center||^2; beta = strong_mu = mu.
inline SmoothTerm quadratic_term(const Vector& center, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  SmoothTerm t;
  t.value = [center, mu](const Vector& w) {
    return 0.5 * mu * (w - center).squaredNorm();
  };
  t.gradient = [center, mu](const Vector& w) -> Vector {
    return mu * (w - center);
  };
  t.lipschitz_beta = mu;
  t.strong_mu = mu;
  t.dimension = static_cast<int>(center.size());
  return t;
}

// Largest eigenvalue of a symmetric PSD operator by power iteration.
inline double power_iteration_lambda_max(
    const std::function<Vector(const Vector&)>& apply, int dim,
    int iterations = 50, double tol = 1e-10) {
  Vector v = Vector::Ones(dim);
  // Deterministic tie-breaker so the iterate is not orthogonal to the
  // dominant eigenvector for e.g. sign-alternating operators.
  for (int i = 0; i < dim; ++i) v[i] += 0.5 / (i + 1.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector av = apply(v);
    const double next = v.dot(av);
    const double nrm = av.norm();
    if (nrm == 0.0) return 0.0;
    v = av / nrm;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

// L(w) = (1/2N)||Xw - y||^2 + (nu_ridge/2)||w||^2.
inline SmoothTerm least_squares_term(const Matrix& design,
                                     const Vector& targets,
                                     double nu_ridge = 0.0) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("empty design matrix");
  if (targets.size() != n) {
    throw std::invalid_argument("dimension mismatch: targets vs design rows");
  }
  if (nu_ridge < 0.0) throw std::invalid_argument("nu_ridge must be >= 0");

  const double invn = 1.0 / static_cast<double>(n);
  auto gram_apply = [design, invn](const Vector& v) -> Vector {
    return invn * (design.transpose() * (design * v));
  };
  const double lmax = power_iteration_lambda_max(gram_apply, static_cast<int>(p));
  // lambda_min via power iteration on the shifted operator lmax*I - A.
  auto shifted = [gram_apply, lmax](const Vector& v) -> Vector {
    return lmax * v - gram_apply(v);
  };
  const double lmin =
      std::max(0.0, lmax - power_iteration_lambda_max(shifted, static_cast<int>(p)));

  SmoothTerm t;
  t.value = [design, targets, invn, nu_ridge](const Vector& w) {
    if (w.size() != design.cols()) {
      throw std::invalid_argument("dimension mismatch in least_squares value");
    }
    return 0.5 * invn * (design * w - targets).squaredNorm() +
           0.5 * nu_ridge * w.squaredNorm();
  };
  t.gradient = [design, targets, invn, nu_ridge](const Vector& w) -> Vector {
    if (w.size() != design.cols()) {
      throw std::invalid_argument("dimension mismatch in least_squares gradient");
    }
    return invn * (design.transpose() * (design * w - targets)) + nu_ridge * w;
  };
  t.lipschitz_beta = lmax + nu_ridge;
  t.strong_mu = lmin + nu_ridge;
  t.dimension = static_cast<int>(p);
  return t;
}

// Circular convolution of w (length n) with causal taps h (length k <= n):
// (h * w)[i] = sum_j h[j] w[(i - j) mod n].
inline Vector circular_convolve(const Vector& taps, const Vector& w) {
  const auto n = w.size();
  const auto k = taps.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::Index idx = i - j;
      if (idx < 0) idx += n;
      acc += taps[j] * w[idx];
    }
    out[i] = acc;
  }
  return out;
}

// Adjoint of circular_convolve: (h~ * r)[i] = sum_j h[j] r[(i + j) mod n].
inline Vector circular_correlate(const Vector& taps, const Vector& r) {
  const auto n = r.size();
  const auto k = taps.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::Index idx = i + j;
      if (idx >= n) idx -= n;
      acc += taps[j] * r[idx];
    }
    out[i] = acc;
  }
  return out;
}

// L(w) = (1/2)||y - h*w||^2 + (nu_ridge/2)||w||^2 with circular convolution.
// beta = max_omega |h_hat(omega)|^2 + nu_ridge via the length-n DFT of the
// zero-padded taps.
inline SmoothTerm convolution_term(const Vector& kernel,
                                   const Vector& observation,
                                   double nu_ridge = 0.0) {
  const auto n = observation.size();
  const auto k = kernel.size();
  if (n < 1 || k < 1) throw std::invalid_argument("empty kernel or observation");
  if (k > n) throw std::invalid_argument("kernel longer than observation");
  if (nu_ridge < 0.0) throw std::invalid_argument("nu_ridge must be >= 0");

  double hhat_sq_max = 0.0;
  for (Eigen::Index f = 0; f < n; ++f) {
    double re = 0.0, im = 0.0;
    const double base = -2.0 * 3.14159265358979323846 *
                        static_cast<double>(f) / static_cast<double>(n);
    for (Eigen::Index j = 0; j < k; ++j) {
      re += kernel[j] * std::cos(base * static_cast<double>(j));
      im += kernel[j] * std::sin(base * static_cast<double>(j));
    }
    hhat_sq_max = std::max(hhat_sq_max, re * re + im * im);
  }

  SmoothTerm t;
  t.value = [kernel, observation, nu_ridge](const Vector& w) {
    if (w.size() != observation.size()) {
      throw std::invalid_argument("length mismatch in convolution value");
    }
    return 0.5 * (circular_convolve(kernel, w) - observation).squaredNorm() +
           0.5 * nu_ridge * w.squaredNorm();
  };
  t.gradient = [kernel, observation, nu_ridge](const Vector& w) -> Vector {
    if (w.size() != observation.size()) {
      throw std::invalid_argument("length mismatch in convolution gradient");
    }
    const Vector resid = circular_convolve(kernel, w) - observation;
    return circular_correlate(kernel, resid) + nu_ridge * w;
  };
  t.lipschitz_beta = hhat_sq_max + nu_ridge;
  t.strong_mu = nu_ridge;
  t.dimension = static_cast<int>(n);
  return t;
}

}  // namespace spg
