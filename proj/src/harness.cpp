#include "spg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace spg {

std::vector<std::uint64_t> make_seeds(int count, std::uint64_t base) {
  if (count < 1) throw std::invalid_argument("seed count must be >= 1");
  std::vector<std::uint64_t> seeds(count);
  std::iota(seeds.begin(), seeds.end(), base);
  return seeds;
}

// ---------------------------------------------------------------------------
// Regression data
// ---------------------------------------------------------------------------

Vector basis_row(Dictionary dict, int p, double x, bool alt_sine_indexing) {
  Vector row(p);
  if (dict == Dictionary::Polynomial) {
    double v = 1.0;
    for (int k = 0; k < p; ++k) {
      row[k] = v;
      v *= x;
    }
    return row;
  }
  if (p % 2 == 0) {
    throw std::invalid_argument("trigonometric dictionary requires odd p");
  }
  const int q = (p - 1) / 2;
  // cos((k-1)x) for k = 1..q, then sin(kx) for k = q+1..2q+1 (or sin((k-q)x)
  // with the alternative indexing).
  for (int k = 1; k <= q; ++k) row[k - 1] = std::cos((k - 1) * x);
  for (int k = q + 1; k <= 2 * q + 1; ++k) {
    const int freq = alt_sine_indexing ? (k - q) : k;
    row[k - 1] = std::sin(freq * x);
  }
  return row;
}

std::pair<Matrix, Vector> gen_regression_data(const DataGenSpec& spec) {
  if (spec.p < 1 || spec.N < 1) throw std::invalid_argument("p, N must be >= 1");
  if (spec.dictionary == Dictionary::Trigonometric && spec.p % 2 == 0) {
    throw std::invalid_argument("trigonometric dictionary requires odd p");
  }
  if (spec.true_weights.size() != spec.p) {
    throw std::invalid_argument("true_weights length must equal p");
  }
  const double lo = spec.dictionary == Dictionary::Polynomial ? -1.0 : 0.0;
  const double hi = spec.dictionary == Dictionary::Polynomial
                        ? 1.0
                        : 2.0 * 3.14159265358979323846;
  Rng rng(spec.data_seed);
  Matrix design(spec.N, spec.p);
  Vector targets(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    const double x = lo + (hi - lo) * rng.next_uniform();
    design.row(i) = basis_row(spec.dictionary, spec.p, x, spec.alt_sine_indexing);
    double y = design.row(i).dot(spec.true_weights);
    if (spec.label_noise_std > 0.0) {
      y += spec.label_noise_std * rng.next_gaussian();
    }
    targets[i] = y;
  }
  return {design, targets};
}

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

CompositeProblem toy_problem(double mu, double omega, double nu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  Vector center(1);
  center[0] = 10.0;
  CompositeProblem p;
  p.smooth = quadratic_term(center, mu);
  p.reg = shifted_elastic_net_regularizer(center, omega, nu);
  p.reference_solution = center;
  return p;
}

// Peak-normalized taps (center tap 1). Normalizing to unit sum instead makes
// the blurred spikes so weak that w = 0 satisfies the l1 optimality condition
// of the deconvolution objective and every method returns the zero signal;
// the peak normalization reproduces the expected sparsity counts.
Vector gaussian_kernel(double std_samples, double trunc_sigmas) {
  if (!(std_samples > 0.0)) throw std::invalid_argument("kernel std must be > 0");
  const int radius = std::max(1, static_cast<int>(std::ceil(trunc_sigmas * std_samples)));
  Vector taps(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j) {
    taps[j + radius] = std::exp(-0.5 * j * j / (std_samples * std_samples));
  }
  return taps;
}

Vector sparse_spike_signal(int length, int zero_count, std::uint64_t seed) {
  if (zero_count < 0 || zero_count > length) {
    throw std::invalid_argument("zero_count out of range");
  }
  const int spikes = length - zero_count;
  Rng rng(seed);
  Vector w = Vector::Zero(length);
  std::set<int> used;
  while (static_cast<int>(used.size()) < spikes) {
    used.insert(static_cast<int>(rng.next_index(length)));
  }
  for (int pos : used) {
    const double amp = 1.0 + 2.0 * rng.next_uniform();
    w[pos] = rng.next_uniform() < 0.5 ? -amp : amp;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace {

void require_unique_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("seed list must be non-empty");
  std::set<std::uint64_t> s(seeds.begin(), seeds.end());
  if (s.size() != seeds.size()) {
    throw std::invalid_argument("seed list must be duplicate-free");
  }
}

Json schedule_json(const StepSchedule& s) {
  Json j;
  j["description"] = s.describe();
  j["lambda_inf"] = s.lambda_inf;
  return j;
}

Json condition_json(const ConditionReport& rep) {
  Json j;
  j["a3_satisfied"] = rep.a3_satisfied;
  j["first_violation"] = rep.first_violation;
  j["a4_satisfied"] = rep.a4_satisfied;
  j["summary"] = rep.summary();
  return j;
}

ConditionReport precheck(const StepSchedule& schedule, double beta,
                         const VarianceCertificate& cert, double epsilon,
                         int horizon, bool force, const char* experiment) {
  const ConditionReport rep =
      check_step_condition(schedule, beta, cert, epsilon, horizon);
  if (!rep.a3_satisfied || !rep.a4_satisfied) {
    if (!force) {
      throw std::runtime_error(std::string(experiment) +
                               ": schedule fails step conditions (" +
                               rep.summary() + "); pass force to run anyway");
    }
    std::fprintf(stderr, "warning: %s schedule outside step conditions: %s\n",
                 experiment, rep.summary().c_str());
  }
  return rep;
}

}  // namespace

ExperimentResult run_toy(const ToyParams& params) {
  require_unique_seeds(params.seeds);
  ExperimentResult result;
  result.problem = toy_problem(params.mu, params.omega, params.nu);

  const double noise_std = std::sqrt(params.noise_variance);
  GradientOracle oracle =
      additive_gaussian_oracle(result.problem.smooth, noise_std, params.seeds.front());

  const ConditionReport rep =
      precheck(params.schedule, result.problem.smooth.lipschitz_beta,
               oracle.certificate, params.epsilon, params.iterations,
               params.force, "toy");

  SolverConfig config;
  config.schedule = params.schedule;
  config.iterations = params.iterations;
  config.epsilon = params.epsilon;
  if (params.fobos_c1 > 0.0) {
    const double c1 = params.fobos_c1;
    config.average_weight = [c1](int k) { return c1 / k; };
  }

  Vector w1(1);
  w1[0] = params.w1;
  result.traces.reserve(params.seeds.size());
  for (const auto seed : params.seeds) {
    result.traces.push_back(run_spg(result.problem, oracle, config, seed, w1));
  }

  result.meta["experiment"] = "toy";
  result.meta["mu"] = params.mu;
  result.meta["omega"] = params.omega;
  result.meta["nu"] = params.nu;
  result.meta["noise_variance"] = params.noise_variance;
  result.meta["noise_interpretation"] = "N(0,v) read as variance v";
  result.meta["iterations"] = params.iterations;
  result.meta["seeds"] = params.seeds;
  result.meta["w1"] = params.w1;
  result.meta["rng"] = kRngId;
  result.meta["schedule"] = schedule_json(params.schedule);
  result.meta["fobos_c1"] = params.fobos_c1;
  result.meta["reference"] = "analytic minimizer w=10";
  result.meta["conditions"] = condition_json(rep);
  return result;
}

ExperimentResult run_regression(const RegressionParams& params) {
  require_unique_seeds(params.seeds);
  const bool poly = params.dictionary == Dictionary::Polynomial;

  DataGenSpec spec;
  spec.dictionary = params.dictionary;
  spec.alt_sine_indexing = params.alt_sine_indexing;
  spec.label_noise_std = std::sqrt(0.3);
  spec.data_seed = params.data_seed;
  double mu_reg, omega;
  StepSchedule schedule;
  if (poly) {
    spec.p = 6;
    spec.N = 9;
    spec.true_weights = Vector(6);
    spec.true_weights << 3, 2, 1, 0, 1, 0;
    mu_reg = 0.1;
    omega = 0.01;
    schedule = shifted_schedule(15.0, 100.0);
  } else {
    spec.p = 21;
    spec.N = 32;
    spec.true_weights = Vector(21);
    spec.true_weights << 0, 0.2, 0, 0.5, 1, -1, 0, 1, 2, 0.5, 0, 0, -0.1, -2.5,
        1, 0, 0, -1, 0.9, -0.5, 0;
    mu_reg = 0.01;
    omega = 0.01;
    schedule = shifted_schedule(10.0, 100.0);
  }

  const auto [design, targets] = gen_regression_data(spec);

  ExperimentResult result;
  result.problem.smooth = least_squares_term(design, targets, 0.0);
  result.problem.reg = elastic_net_regularizer(omega, mu_reg);

  // Reference solution from the exact-gradient forward-backward run.
  const double fb_step = 1.0 / result.problem.smooth.lipschitz_beta;
  const Vector w0 = Vector::Zero(spec.p);
  const RunTrace fb =
      run_forward_backward(result.problem, fb_step, params.fb_iterations, w0);
  result.problem.reference_solution = fb.final_point;

  // Incremental oracle: one data term per sample.
  std::vector<SmoothTerm> components;
  components.reserve(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    const Vector xi = design.row(i).transpose();
    const double yi = targets[i];
    SmoothTerm t;
    t.value = [xi, yi](const Vector& w) {
      const double r = xi.dot(w) - yi;
      return 0.5 * r * r;
    };
    t.gradient = [xi, yi](const Vector& w) -> Vector {
      return (xi.dot(w) - yi) * xi;
    };
    t.lipschitz_beta = xi.squaredNorm();
    t.strong_mu = 0.0;
    t.dimension = spec.p;
    components.push_back(std::move(t));
  }
  GradientOracle oracle = finite_sum_oracle(components, params.seeds.front());

  const ConditionReport rep =
      precheck(schedule, result.problem.smooth.lipschitz_beta,
               oracle.certificate, 0.4, params.iterations, params.force,
               poly ? "regression-poly" : "regression-trig");

  SolverConfig config;
  config.schedule = schedule;
  config.iterations = params.iterations;
  // FOBOS averaging with eta_n equal to the step schedule.
  config.average_weight = [schedule](int k) { return schedule.gamma(k); };

  result.traces.reserve(params.seeds.size());
  for (const auto seed : params.seeds) {
    result.traces.push_back(run_spg(result.problem, oracle, config, seed, w0));
  }

  result.meta["experiment"] = poly ? "regression-poly" : "regression-trig";
  result.meta["p"] = spec.p;
  result.meta["N"] = spec.N;
  result.meta["mu"] = mu_reg;
  result.meta["omega"] = omega;
  result.meta["label_noise_variance"] = 0.3;
  result.meta["data_seed"] = spec.data_seed;
  result.meta["alt_sine_indexing"] = spec.alt_sine_indexing;
  result.meta["iterations"] = params.iterations;
  result.meta["seeds"] = params.seeds;
  result.meta["rng"] = kRngId;
  result.meta["schedule"] = schedule_json(schedule);
  result.meta["reference"] =
      "forward-backward, " + std::to_string(params.fb_iterations) +
      " iterations, step 1/beta";
  result.meta["conditions"] = condition_json(rep);
  return result;
}

ExperimentResult run_deconv(const DeconvParams& params) {
  require_unique_seeds(params.seeds);
  if (params.length < 8) throw std::invalid_argument("length must be >= 8");

  int zero_count = params.zero_count;
  if (zero_count < 0) {
    zero_count = static_cast<int>(
        std::lround(993.0 / 1024.0 * static_cast<double>(params.length)));
  }
  const Vector truth = sparse_spike_signal(params.length, zero_count, params.data_seed);
  const Vector kernel = gaussian_kernel(params.kernel_std);

  Rng data_rng(params.data_seed + 0x9e3779b9ULL);
  Vector y = circular_convolve(kernel, truth);
  const double obs_std = std::sqrt(params.obs_noise_variance);
  for (int i = 0; i < params.length; ++i) y[i] += obs_std * data_rng.next_gaussian();

  ExperimentResult result;
  result.problem.smooth = convolution_term(kernel, y, 0.02);
  result.problem.reg = l1_regularizer(1.0);

  const double fb_step = 1.0 / result.problem.smooth.lipschitz_beta;
  const Vector w0 = Vector::Zero(params.length);
  const RunTrace fb =
      run_forward_backward(result.problem, fb_step, params.fb_iterations, w0);
  result.problem.reference_solution = fb.final_point;

  const double grad_std = std::sqrt(params.grad_noise_variance);
  GradientOracle oracle = additive_gaussian_oracle(result.problem.smooth,
                                                   grad_std, params.seeds.front());

  const ConditionReport rep =
      precheck(params.schedule, result.problem.smooth.lipschitz_beta,
               oracle.certificate, 0.4, params.iterations, params.force,
               "deconv");

  SolverConfig config;
  config.schedule = params.schedule;
  config.iterations = params.iterations;
  config.record_every = params.length <= kSnapshotMaxDim ? 1 : 10;
  const StepSchedule sched = params.schedule;
  config.average_weight = [sched](int k) { return sched.gamma(k); };

  result.traces.reserve(params.seeds.size());
  for (const auto seed : params.seeds) {
    result.traces.push_back(run_spg(result.problem, oracle, config, seed, w0));
  }

  result.meta["experiment"] = "deconv";
  result.meta["length"] = params.length;
  result.meta["kernel_std"] = params.kernel_std;
  result.meta["kernel"] = "discrete Gaussian, truncated at 4 sigma, unit peak";
  result.meta["obs_noise_variance"] = params.obs_noise_variance;
  result.meta["grad_noise_variance"] = params.grad_noise_variance;
  result.meta["truth_zero_count"] = zero_count;
  result.meta["data_seed"] = params.data_seed;
  result.meta["iterations"] = params.iterations;
  result.meta["seeds"] = params.seeds;
  result.meta["rng"] = kRngId;
  result.meta["schedule"] = schedule_json(params.schedule);
  result.meta["reference"] =
      "forward-backward, " + std::to_string(params.fb_iterations) +
      " iterations, step 1/beta";
  result.meta["conditions"] = condition_json(rep);
  return result;
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace {

void fmt_double(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f != nullptr) std::fclose(f);
  }
};

std::FILE* open_or_throw(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

}  // namespace

void write_trace_csv(const std::string& path,
                     const std::vector<RunTrace>& traces) {
  std::FILE* f = open_or_throw(path);
  FileCloser closer{f};
  const bool avg = !traces.empty() && traces.front().has_average;
  std::fprintf(f, "seed,n,dist_to_ref,objective,zero_count%s\n",
               avg ? ",avg_dist,avg_zero_count" : "");
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.iteration.size(); ++i) {
      std::fprintf(f, "%llu,%d,", static_cast<unsigned long long>(tr.meta.seed),
                   tr.iteration[i]);
      fmt_double(f, tr.dist_to_ref[i]);
      std::fputc(',', f);
      fmt_double(f, tr.objective[i]);
      std::fprintf(f, ",%d", tr.zero_count[i]);
      if (avg) {
        std::fputc(',', f);
        fmt_double(f, tr.avg_dist_to_ref[i]);
        std::fprintf(f, ",%d", tr.avg_zero_count[i]);
      }
      std::fputc('\n', f);
    }
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<RunTrace>& traces,
                       const std::vector<double>* bound_values) {
  if (traces.empty()) throw std::invalid_argument("empty ensemble");
  std::FILE* f = open_or_throw(path);
  FileCloser closer{f};
  std::fprintf(f, "n,mean_dist,std_dist%s\n",
               bound_values != nullptr ? ",bound_value" : "");
  const auto& first = traces.front();
  for (std::size_t i = 0; i < first.iteration.size(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (const auto& tr : traces) {
      mean += tr.dist_to_ref[i];
      sq += tr.dist_to_ref[i] * tr.dist_to_ref[i];
    }
    const double m = static_cast<double>(traces.size());
    mean /= m;
    const double var = std::max(0.0, sq / m - mean * mean);
    std::fprintf(f, "%d,", first.iteration[i]);
    fmt_double(f, mean);
    std::fputc(',', f);
    fmt_double(f, std::sqrt(var));
    if (bound_values != nullptr) {
      std::fputc(',', f);
      fmt_double(f, (*bound_values)[i]);
    }
    std::fputc('\n', f);
  }
}

void write_meta_json(const std::string& path, const Json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << meta.dump(2) << "\n";
}

double mean_dist_at(const std::vector<RunTrace>& traces, int iterate) {
  if (traces.empty()) throw std::invalid_argument("empty ensemble");
  const auto& it = traces.front().iteration;
  const auto pos = std::find(it.begin(), it.end(), iterate);
  if (pos == it.end()) {
    throw std::invalid_argument("iterate not recorded: " + std::to_string(iterate));
  }
  const auto idx = static_cast<std::size_t>(pos - it.begin());
  double mean = 0.0;
  for (const auto& tr : traces) mean += tr.dist_to_ref[idx];
  return mean / static_cast<double>(traces.size());
}

}  // namespace spg
