#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spg/bounds.hpp"
#include "spg/oracle.hpp"
#include "spg/problem.hpp"
#include "spg/solver.hpp"

namespace spg {

using Json = nlohmann::json;

std::vector<std::uint64_t> make_seeds(int count, std::uint64_t base = 1);

// ---------------------------------------------------------------------------
// Regression data generation
// ---------------------------------------------------------------------------

enum class Dictionary { Polynomial, Trigonometric };

struct DataGenSpec {
  Dictionary dictionary = Dictionary::Polynomial;
  int p = 6;
  int N = 9;
  Vector true_weights;
  double label_noise_std = 0.0;
  std::uint64_t data_seed = 1;
  // Alternative sine indexing sin((k-q) x) instead of the printed sin(k x)
  // for the trigonometric dictionary.
  bool alt_sine_indexing = false;
};

// Row of the dictionary design matrix at input x.
Vector basis_row(Dictionary dict, int p, double x, bool alt_sine_indexing = false);

// Uniformly drawn inputs on the dictionary domain, targets from the noisy
// linear model. Deterministic in data_seed.
std::pair<Matrix, Vector> gen_regression_data(const DataGenSpec& spec);

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

// minimize (mu/2)|w-10|^2 + omega|w-10| + (nu/2)|w-10|^2; reference 10.
CompositeProblem toy_problem(double mu, double omega = 0.02, double nu = 0.0);

// Discrete Gaussian taps, truncated at trunc_sigmas*std, normalized to unit
// peak at the center index.
Vector gaussian_kernel(double std_samples, double trunc_sigmas = 4.0);

// Sparse spike signal: (length - zero_count) spikes at distinct uniform
// positions with amplitudes +-U[1,3].
Vector sparse_spike_signal(int length, int zero_count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentResult {
  std::vector<RunTrace> traces;
  CompositeProblem problem;
  Json meta;
};

struct ToyParams {
  double mu = 1.0;
  double omega = 0.02;
  double nu = 0.0;  // extra strong convexity assigned to R (0 in the presets)
  StepSchedule schedule = power_schedule(1.0, 1.0);
  double noise_variance = 0.1;
  std::vector<std::uint64_t> seeds = make_seeds(100);
  int iterations = 1000;
  double w1 = 0.0;
  double epsilon = 0.4;
  bool force = false;  // run even when (A3)/(A4) checks fail
  // eta_k = C1/k averaging alongside the iterates when > 0.
  double fobos_c1 = 0.0;
};

ExperimentResult run_toy(const ToyParams& params);

struct RegressionParams {
  Dictionary dictionary = Dictionary::Polynomial;
  bool alt_sine_indexing = false;
  std::vector<std::uint64_t> seeds = make_seeds(10);
  int iterations = 10000;
  int fb_iterations = 50000;
  std::uint64_t data_seed = 7;
  bool force = true;  // the shifted schedules from the experiments ignore (A3)
};

// Preset values: polynomial p=6, N=9, gamma_n = eta_n = 15/(n+100),
// mu = 0.1, omega = 0.01; trigonometric p=21, N=32, gamma_n = 10/(n+100),
// mu = 0.01, omega = 0.01.
ExperimentResult run_regression(const RegressionParams& params);

struct DeconvParams {
  int length = 1024;
  double kernel_std = 4.0;
  double obs_noise_variance = 0.06;
  double grad_noise_variance = 0.01;
  StepSchedule schedule = shifted_schedule(3.0, 100.0);
  std::vector<std::uint64_t> seeds = make_seeds(1);
  int iterations = 5000;
  int fb_iterations = 10000;
  int zero_count = -1;  // -1: scale 993/1024 to the configured length
  std::uint64_t data_seed = 11;
  bool force = true;
};

ExperimentResult run_deconv(const DeconvParams& params);

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

// trace.csv: seed,n,dist_to_ref,objective,zero_count[,avg_dist,avg_zero_count]
void write_trace_csv(const std::string& path,
                     const std::vector<RunTrace>& traces);

// summary.csv: n,mean_dist,std_dist[,bound_value]
void write_summary_csv(const std::string& path,
                       const std::vector<RunTrace>& traces,
                       const std::vector<double>* bound_values = nullptr);

void write_meta_json(const std::string& path, const Json& meta);

// Seed-mean of |dist_to_ref| at a recorded iterate index; throws if the
// index was not recorded.
double mean_dist_at(const std::vector<RunTrace>& traces, int iterate);

}  // namespace spg
