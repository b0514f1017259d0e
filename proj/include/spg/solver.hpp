#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spg/oracle.hpp"
#include "spg/problem.hpp"
#include "spg/rng.hpp"

namespace spg {

inline constexpr double kZeroTol = 1e-12;
inline constexpr double kDivergenceGuard = 1e12;

// Step-size schedule gamma_n together with the relaxation schedule lambda_n.
struct StepSchedule {
  enum class Kind { Power, Shifted, Constant };

  Kind kind = Kind::Power;
  double c1 = 1.0;     // power: gamma_n = c1 * n^-theta
  double theta = 1.0;
  double a = 1.0;      // shifted: gamma_n = a / (n + b)
  double b = 0.0;
  double constant = 1.0;

  std::function<double(int)> lambda_fn;  // defaults to lambda_inf
  double lambda_inf = 1.0;

  double gamma(int n) const {
    switch (kind) {
      case Kind::Power:
        return c1 * std::pow(static_cast<double>(n), -theta);
      case Kind::Shifted:
        return a / (static_cast<double>(n) + b);
      case Kind::Constant:
        return constant;
    }
    return constant;
  }

  double lambda(int n) const { return lambda_fn ? lambda_fn(n) : lambda_inf; }

  // Exact asymptotic exponent of gamma_n as a power of n.
  double gamma_exponent() const {
    switch (kind) {
      case Kind::Power: return -theta;
      case Kind::Shifted: return -1.0;
      case Kind::Constant: return 0.0;
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Power: os << "gamma_n=" << c1 << "*n^-" << theta; break;
      case Kind::Shifted: os << "gamma_n=" << a << "/(n+" << b << ")"; break;
      case Kind::Constant: os << "gamma_n=" << constant; break;
    }
    os << ", lambda_inf=" << lambda_inf;
    return os.str();
  }
};

inline StepSchedule power_schedule(double c1, double theta, double lambda = 1.0) {
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be > 0");
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must be in (0,1]");
  }
  StepSchedule s;
  s.kind = StepSchedule::Kind::Power;
  s.c1 = c1;
  s.theta = theta;
  s.lambda_inf = lambda;
  return s;
}

inline StepSchedule shifted_schedule(double a, double b, double lambda = 1.0) {
  if (!(a > 0.0) || !(b >= 0.0)) throw std::invalid_argument("invalid shifted schedule");
  StepSchedule s;
  s.kind = StepSchedule::Kind::Shifted;
  s.a = a;
  s.b = b;
  s.lambda_inf = lambda;
  return s;
}

inline StepSchedule constant_schedule(double gamma, double lambda = 1.0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  StepSchedule s;
  s.kind = StepSchedule::Kind::Constant;
  s.constant = gamma;
  s.lambda_inf = lambda;
  return s;
}

struct SolverConfig {
  StepSchedule schedule;
  int iterations = 1000;
  double epsilon = 0.4;  // the epsilon of (A3)
  int record_every = 1;
  double zero_tol = kZeroTol;
  // eta-weights for a running iterate average (FOBOS); disabled when empty.
  std::function<double(int)> average_weight;
  // Fixed-point early exit for the deterministic solver; off by default so
  // noiseless SPG and FB traces stay comparable step for step.
  std::optional<double> fixed_point_tol;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw std::invalid_argument("epsilon must be in (0,1)");
    }
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  }
};

// Snapshots are stored only for small problems; larger runs keep the running
// average when requested.
inline constexpr int kSnapshotMaxDim = 64;

struct TraceMeta {
  std::uint64_t seed = 0;
  std::string rng_id = kRngId;
  std::string schedule;
  bool early_exit = false;
  int early_exit_at = 0;
};

struct RunTrace {
  std::vector<int> iteration;       // iterate index n of each record
  std::vector<double> dist_to_ref;  // ||w_n - w_ref||; NaN when no reference
  std::vector<double> objective;
  std::vector<int> zero_count;
  std::vector<Vector> snapshots;    // w_n, only when dimension <= kSnapshotMaxDim
  // Parallel series for the running eta-weighted average, when enabled.
  std::vector<double> avg_dist_to_ref;
  std::vector<int> avg_zero_count;
  Vector final_point;
  Vector final_average;
  bool has_average = false;
  TraceMeta meta;
};

inline int count_zeros(const Vector& w, double tol = kZeroTol) {
  int c = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) <= tol) ++c;
  }
  return c;
}

// One iteration of Algorithm SPG: (1-lambda) w + lambda prox_{gamma R}(w - gamma G).
inline Vector spg_step(const CompositeProblem& problem, const Vector& w,
                       const Vector& G, double gamma, double lambda) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("lambda must be in [0,1]");
  }
  if (!w.allFinite() || !G.allFinite()) {
    throw std::runtime_error("diverged/non-finite iterate");
  }
  if (lambda == 0.0) return w;
  const Vector y = problem.reg.prox(w - gamma * G, gamma);
  if (lambda == 1.0) return y;
  return (1.0 - lambda) * w + lambda * y;
}

namespace detail {

inline void record(RunTrace& trace, const CompositeProblem& problem, int n,
                   const Vector& w, double zero_tol, bool store_snapshot,
                   const Vector* avg) {
  trace.iteration.push_back(n);
  if (problem.reference_solution) {
    trace.dist_to_ref.push_back((w - *problem.reference_solution).norm());
  } else {
    trace.dist_to_ref.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  trace.objective.push_back(problem.objective(w));
  trace.zero_count.push_back(count_zeros(w, zero_tol));
  if (store_snapshot) trace.snapshots.push_back(w);
  if (avg != nullptr) {
    if (problem.reference_solution) {
      trace.avg_dist_to_ref.push_back((*avg - *problem.reference_solution).norm());
    } else {
      trace.avg_dist_to_ref.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    trace.avg_zero_count.push_back(count_zeros(*avg, zero_tol));
  }
}

template <typename GradFn>
RunTrace run_iteration(const CompositeProblem& problem, const SolverConfig& config,
                       std::uint64_t seed, const Vector& w1, GradFn&& grad_at) {
  config.validate();
  if (!w1.allFinite()) throw std::invalid_argument("w1 must be finite");
  if (w1.size() != problem.smooth.dimension) {
    throw std::invalid_argument("w1 dimension mismatch");
  }

  const bool store_snapshots = problem.smooth.dimension <= kSnapshotMaxDim;
  const bool average = static_cast<bool>(config.average_weight);

  RunTrace trace;
  trace.meta.seed = seed;
  trace.meta.schedule = config.schedule.describe();
  trace.has_average = average;

  Vector w = w1;
  Vector avg = w1;
  double weight_sum = 0.0;
  if (average) {
    weight_sum = config.average_weight(1);
    avg = w1;  // first-term average equals w1 regardless of the weight
  }

  record(trace, problem, 1, w, config.zero_tol, store_snapshots,
         average ? &avg : nullptr);

  for (int n = 1; n <= config.iterations; ++n) {
    const double gamma = config.schedule.gamma(n);
    const double lambda = config.schedule.lambda(n);
    Vector g = grad_at(w, n);
    if (!g.allFinite()) {
      throw std::runtime_error("non-finite gradient estimate at step " +
                               std::to_string(n));
    }
    Vector next = spg_step(problem, w, g, gamma, lambda);
    if (!next.allFinite() || next.norm() > kDivergenceGuard) {
      throw std::runtime_error("diverged/non-finite iterate at step " +
                               std::to_string(n));
    }
    if (config.fixed_point_tol && (next - w).norm() <= *config.fixed_point_tol) {
      w = next;
      trace.meta.early_exit = true;
      trace.meta.early_exit_at = n + 1;
      if (average) {
        const double eta = config.average_weight(n + 1);
        weight_sum += eta;
        avg += (eta / weight_sum) * (w - avg);
      }
      record(trace, problem, n + 1, w, config.zero_tol, store_snapshots,
             average ? &avg : nullptr);
      break;
    }
    w = next;
    if (average) {
      const double eta = config.average_weight(n + 1);
      weight_sum += eta;
      avg += (eta / weight_sum) * (w - avg);
    }
    const int m = n + 1;
    if ((m - 1) % config.record_every == 0 || m == config.iterations + 1) {
      record(trace, problem, m, w, config.zero_tol, store_snapshots,
             average ? &avg : nullptr);
    }
  }

  trace.final_point = w;
  if (average) trace.final_average = avg;
  return trace;
}

}  // namespace detail

// Runs Algorithm SPG for the configured budget. Deterministic given
// (seed, w1, config).
inline RunTrace run_spg(const CompositeProblem& problem,
                        const GradientOracle& oracle,
                        const SolverConfig& config, std::uint64_t seed,
                        const Vector& w1) {
  Rng rng(seed);
  return detail::run_iteration(
      problem, config, seed, w1,
      [&](const Vector& w, int n) { return oracle.estimate(w, n, rng); });
}

// Deterministic forward-backward splitting with constant step; the final
// point is usable as a reference solution.
inline RunTrace run_forward_backward(const CompositeProblem& problem,
                                     double step, int iterations,
                                     const Vector& w1,
                                     std::optional<double> fixed_point_tol = {}) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  if (problem.smooth.lipschitz_beta > 0.0 &&
      step > 1.0 / problem.smooth.lipschitz_beta + 1e-15) {
    throw std::invalid_argument("step must satisfy step <= 1/beta");
  }
  SolverConfig config;
  config.schedule = constant_schedule(step);
  config.iterations = iterations;
  config.fixed_point_tol = fixed_point_tol;
  return detail::run_iteration(
      problem, config, 0, w1,
      [&](const Vector& w, int) { return problem.smooth.gradient(w); });
}

// eta-weighted running means of the recorded iterates, eta_k = C1 / k.
// Requires full snapshots recorded at every iterate.
inline std::vector<Vector> fobos_average(const RunTrace& trace, double C1) {
  if (!(C1 > 0.0)) throw std::invalid_argument("C1 must be > 0");
  if (trace.snapshots.empty()) {
    throw std::runtime_error(
        "trace has no iterate snapshots and no running average");
  }
  std::vector<Vector> out;
  out.reserve(trace.snapshots.size());
  Vector avg = trace.snapshots.front();
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
    const double eta = C1 / static_cast<double>(trace.iteration[i]);
    weight_sum += eta;
    if (i == 0) {
      avg = trace.snapshots[0];
    } else {
      avg += (eta / weight_sum) * (trace.snapshots[i] - avg);
    }
    out.push_back(avg);
  }
  return out;
}

struct ConditionReport {
  bool a3_satisfied = true;
  int first_violation = 0;  // 0 when none
  double gamma_bound = 0.0; // RHS of (A3) for the constant-alpha certificate
  double gamma_lambda_exponent = 0.0;
  double chi_exponent = 0.0;
  bool sum_diverges = false;   // sum lambda_n gamma_n = +inf surrogate
  bool chi_summable = false;   // sum chi_n^2 < +inf surrogate
  bool a4_satisfied = false;

  std::string summary() const {
    std::ostringstream os;
    if (a3_satisfied) {
      os << "A3 satisfied for all n";
    } else {
      os << "A3 violated first at n=" << first_violation
         << " (bound " << gamma_bound << ")";
    }
    os << "; A4 " << (a4_satisfied ? "satisfied" : "violated")
       << " (sum exponent " << gamma_lambda_exponent
       << ", chi^2 exponent " << chi_exponent << ")";
    return os.str();
  }
};

// Checks (A3) for n = 1..horizon and the (A4) summability surrogates via the
// schedules' asymptotic exponents.
inline ConditionReport check_step_condition(const StepSchedule& schedule,
                                            double beta,
                                            const VarianceCertificate& cert,
                                            double epsilon, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  ConditionReport rep;
  rep.gamma_bound =
      (1.0 - epsilon) / (beta * (1.0 + 2.0 * cert.sigma_sq * cert.alpha));
  for (int n = 1; n <= horizon; ++n) {
    const double g = schedule.gamma(n);
    if (!(g > 0.0) || g > rep.gamma_bound) {
      rep.a3_satisfied = false;
      rep.first_violation = n;
      break;
    }
  }
  const double ge = schedule.gamma_exponent();
  rep.gamma_lambda_exponent = ge;  // lambda_n is bounded; it does not shift the exponent
  rep.chi_exponent = 2.0 * ge;
  rep.sum_diverges = rep.gamma_lambda_exponent >= -1.0;
  rep.chi_summable = rep.chi_exponent < -1.0;
  rep.a4_satisfied = rep.sum_diverges && rep.chi_summable;
  return rep;
}

}  // namespace spg
