#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "spg/bounds.hpp"
#include "spg/harness.hpp"

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("unwritable output path: " + out);
}

void write_result(const std::string& out, const spg::ExperimentResult& result) {
  ensure_dir(out);
  spg::write_trace_csv(out + "/trace.csv", result.traces);
  spg::write_summary_csv(out + "/summary.csv", result.traces);
  spg::write_meta_json(out + "/meta.json", result.meta);
}

spg::StepSchedule parse_schedule(const std::string& kind, double c1,
                                 double theta, double a, double b,
                                 double lambda) {
  if (kind == "power") return spg::power_schedule(c1, theta, lambda);
  if (kind == "shifted") return spg::shifted_schedule(a, b, lambda);
  if (kind == "constant") return spg::constant_schedule(c1, lambda);
  throw CLI::ValidationError("schedule must be power, shifted, or constant");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic proximal gradient experiment harness"};
  app.require_subcommand(1);
  app.set_config("--config");

  // --- toy ---------------------------------------------------------------
  auto* toy = app.add_subcommand("toy", "1-D toy problem ensemble");
  std::vector<double> toy_mu{1.0};
  double toy_omega = 0.02, toy_nu = 0.0, toy_noise_std = 0.316227766016838;
  double toy_c1 = 1.0, toy_theta = 1.0, toy_a = 1.0, toy_b = 100.0;
  double toy_lambda = 1.0, toy_w1 = 0.0, toy_fobos_c1 = 0.0;
  std::string toy_sched = "power";
  int toy_seeds = 100, toy_iters = 1000;
  std::uint64_t toy_seed_base = 1;
  bool toy_force = false;
  std::string toy_out = "runs/toy";
  toy->add_option("--mu", toy_mu, "strong convexity value(s); one run per value");
  toy->add_option("--omega", toy_omega, "l1 weight of the regularizer");
  toy->add_option("--nu", toy_nu, "quadratic weight assigned to the regularizer");
  toy->add_option("--noise-std", toy_noise_std, "gradient noise std deviation");
  toy->add_option("--schedule", toy_sched, "power|shifted|constant");
  toy->add_option("--c1", toy_c1, "power schedule constant (or constant step)");
  toy->add_option("--theta", toy_theta, "power schedule exponent");
  toy->add_option("--a", toy_a, "shifted schedule numerator");
  toy->add_option("--b", toy_b, "shifted schedule offset");
  toy->add_option("--lambda", toy_lambda, "relaxation parameter");
  toy->add_option("--w1", toy_w1, "starting point");
  toy->add_option("--fobos-c1", toy_fobos_c1, "if > 0, track the eta_k=C1/k average");
  toy->add_option("--seeds", toy_seeds, "number of seeds");
  toy->add_option("--seed-base", toy_seed_base, "first seed value");
  toy->add_option("--iters", toy_iters, "iteration budget");
  toy->add_flag("--force", toy_force, "run even when (A3)/(A4) checks fail");
  toy->add_option("--out", toy_out, "output directory");

  // --- regression --------------------------------------------------------
  auto* reg = app.add_subcommand("regression", "dictionary regression presets");
  std::string reg_preset = "poly";
  int reg_seeds = 10, reg_iters = 10000, reg_fb_iters = 50000;
  std::uint64_t reg_seed_base = 1, reg_data_seed = 7;
  bool reg_alt = false;
  std::string reg_out = "runs/regression";
  reg->add_option("--preset", reg_preset, "poly|trig");
  reg->add_flag("--alt-sine-indexing", reg_alt,
                "use sin((k-q)x) instead of sin(kx) for the sine block");
  reg->add_option("--seeds", reg_seeds, "number of seeds");
  reg->add_option("--seed-base", reg_seed_base, "first seed value");
  reg->add_option("--iters", reg_iters, "iteration budget");
  reg->add_option("--fb-iters", reg_fb_iters, "reference solver budget");
  reg->add_option("--data-seed", reg_data_seed, "data generation seed");
  reg->add_option("--out", reg_out, "output directory");

  // --- deconv ------------------------------------------------------------
  auto* dec = app.add_subcommand("deconv", "signal deconvolution preset");
  int dec_length = 1024, dec_seeds = 1, dec_iters = 5000, dec_fb_iters = 10000;
  int dec_zero_count = -1;
  double dec_kernel_std = 4.0, dec_obs_var = 0.06, dec_grad_var = 0.01;
  double dec_a = 3.0, dec_b = 100.0;
  std::uint64_t dec_seed_base = 1, dec_data_seed = 11;
  std::string dec_out = "runs/deconv";
  dec->add_option("--length", dec_length, "signal length");
  dec->add_option("--kernel-std", dec_kernel_std, "Gaussian kernel std (samples)");
  dec->add_option("--obs-noise-var", dec_obs_var, "observation noise variance");
  dec->add_option("--grad-noise-var", dec_grad_var, "gradient noise variance");
  dec->add_option("--a", dec_a, "step schedule numerator a/(n+b)");
  dec->add_option("--b", dec_b, "step schedule offset");
  dec->add_option("--zero-count", dec_zero_count,
                  "zeros in the ground truth (-1: scale 993/1024)");
  dec->add_option("--seeds", dec_seeds, "number of seeds");
  dec->add_option("--seed-base", dec_seed_base, "first seed value");
  dec->add_option("--iters", dec_iters, "iteration budget");
  dec->add_option("--fb-iters", dec_fb_iters, "reference solver budget");
  dec->add_option("--data-seed", dec_data_seed, "data generation seed");
  dec->add_option("--out", dec_out, "output directory");

  // --- bound -------------------------------------------------------------
  auto* bnd = app.add_subcommand("bound", "convergence bound table");
  double b_theta = 1.0, b_c1 = 1.0, b_mu = 1.0, b_nu = 0.0, b_eps = 0.5;
  double b_sigma_sq = 0.01, b_alpha = 0.0, b_grad = 0.0, b_s_n0 = 1.0;
  double b_lambda = 1.0;
  long long b_nmax = 1000;
  std::string b_out = "runs/bound";
  bnd->add_option("--theta", b_theta)->required();
  bnd->add_option("--c1", b_c1)->required();
  bnd->add_option("--mu", b_mu)->required();
  bnd->add_option("--nu", b_nu);
  bnd->add_option("--epsilon", b_eps)->required();
  bnd->add_option("--sigma-sq", b_sigma_sq)->required();
  bnd->add_option("--alpha-sup", b_alpha);
  bnd->add_option("--grad-norm", b_grad);
  bnd->add_option("--lambda-inf", b_lambda);
  bnd->add_option("--s-n0", b_s_n0, "E||w_{n0}-w_ref||^2");
  bnd->add_option("--n-max", b_nmax);
  bnd->add_option("--out", b_out, "output directory");

  // --- check-conditions ---------------------------------------------------
  auto* chk = app.add_subcommand("check-conditions", "(A3)/(A4) report");
  double k_beta = 1.0, k_sigma_sq = 0.0, k_alpha = 0.0, k_eps = 0.4;
  double k_c1 = 1.0, k_theta = 1.0, k_a = 1.0, k_b = 100.0, k_lambda = 1.0;
  std::string k_sched = "power";
  int k_horizon = 1000;
  chk->add_option("--beta", k_beta)->required();
  chk->add_option("--sigma-sq", k_sigma_sq);
  chk->add_option("--alpha", k_alpha);
  chk->add_option("--epsilon", k_eps)->required();
  chk->add_option("--schedule", k_sched, "power|shifted|constant");
  chk->add_option("--c1", k_c1);
  chk->add_option("--theta", k_theta);
  chk->add_option("--a", k_a);
  chk->add_option("--b", k_b);
  chk->add_option("--lambda", k_lambda);
  chk->add_option("--horizon", k_horizon);

  CLI11_PARSE(app, argc, argv);

  try {
    if (toy->parsed()) {
      for (double mu : toy_mu) {
        spg::ToyParams params;
        params.mu = mu;
        params.omega = toy_omega;
        params.nu = toy_nu;
        params.schedule =
            parse_schedule(toy_sched, toy_c1, toy_theta, toy_a, toy_b, toy_lambda);
        params.noise_variance = toy_noise_std * toy_noise_std;
        params.seeds = spg::make_seeds(toy_seeds, toy_seed_base);
        params.iterations = toy_iters;
        params.w1 = toy_w1;
        params.force = toy_force;
        params.fobos_c1 = toy_fobos_c1;
        const auto result = spg::run_toy(params);
        std::string out = toy_out;
        if (toy_mu.size() > 1) out += "/mu-" + std::to_string(mu);
        write_result(out, result);
        std::printf("toy mu=%g: %zu seeds, mean |w-10| at n=%d: %.6g -> %s\n",
                    mu, result.traces.size(), toy_iters + 1,
                    spg::mean_dist_at(result.traces, toy_iters + 1), out.c_str());
      }
      return 0;
    }
    if (reg->parsed()) {
      spg::RegressionParams params;
      if (reg_preset == "poly") {
        params.dictionary = spg::Dictionary::Polynomial;
      } else if (reg_preset == "trig") {
        params.dictionary = spg::Dictionary::Trigonometric;
      } else {
        throw CLI::ValidationError("preset must be poly or trig");
      }
      params.alt_sine_indexing = reg_alt;
      params.seeds = spg::make_seeds(reg_seeds, reg_seed_base);
      params.iterations = reg_iters;
      params.fb_iterations = reg_fb_iters;
      params.data_seed = reg_data_seed;
      const auto result = spg::run_regression(params);
      write_result(reg_out, result);
      std::printf("regression %s: %zu seeds, mean dist at n=%d: %.6g -> %s\n",
                  reg_preset.c_str(), result.traces.size(), reg_iters + 1,
                  spg::mean_dist_at(result.traces, reg_iters + 1), reg_out.c_str());
      return 0;
    }
    if (dec->parsed()) {
      spg::DeconvParams params;
      params.length = dec_length;
      params.kernel_std = dec_kernel_std;
      params.obs_noise_variance = dec_obs_var;
      params.grad_noise_variance = dec_grad_var;
      params.schedule = spg::shifted_schedule(dec_a, dec_b);
      params.zero_count = dec_zero_count;
      params.seeds = spg::make_seeds(dec_seeds, dec_seed_base);
      params.iterations = dec_iters;
      params.fb_iterations = dec_fb_iters;
      params.data_seed = dec_data_seed;
      const auto result = spg::run_deconv(params);
      write_result(dec_out, result);
      const auto& tr = result.traces.front();
      std::printf("deconv length=%d: final zero count %d (iterate), %d (average) -> %s\n",
                  dec_length, tr.zero_count.back(), tr.avg_zero_count.back(),
                  dec_out.c_str());
      return 0;
    }
    if (bnd->parsed()) {
      spg::BoundParams params = spg::theorem1_constants(
          b_theta, b_c1, b_lambda, b_alpha, b_sigma_sq, b_mu, b_nu, b_eps, b_grad);
      params.s_n0 = b_s_n0;
      ensure_dir(b_out);
      std::FILE* f = std::fopen((b_out + "/bound.csv").c_str(), "wb");
      if (f == nullptr) throw std::runtime_error("unwritable output path: " + b_out);
      std::fprintf(f, "n,bound\n");
      for (long long n = 2LL * params.n0; n <= b_nmax; ++n) {
        std::fprintf(f, "%lld,%.17g\n", n, spg::theorem1_bound(params, n));
      }
      std::fclose(f);
      spg::Json meta;
      meta["theta"] = params.theta;
      meta["c1"] = params.c1;
      meta["lambda_inf"] = params.lambda_inf;
      meta["alpha_sup"] = params.alpha_sup;
      meta["sigma_sq"] = params.sigma_sq;
      meta["mu"] = params.mu;
      meta["nu"] = params.nu;
      meta["epsilon"] = params.epsilon;
      meta["grad_at_sol_norm"] = params.grad_at_sol_norm;
      meta["t"] = params.t;
      meta["c"] = params.c;
      meta["tau"] = params.tau;
      meta["n0"] = params.n0;
      meta["s_n0"] = params.s_n0;
      spg::write_meta_json(b_out + "/meta.json", meta);
      std::printf("bound: c=%g tau=%g n0=%d, table for n in [%d, %lld] -> %s\n",
                  params.c, params.tau, params.n0, 2 * params.n0, b_nmax,
                  b_out.c_str());
      return 0;
    }
    if (chk->parsed()) {
      const spg::StepSchedule schedule =
          parse_schedule(k_sched, k_c1, k_theta, k_a, k_b, k_lambda);
      spg::VarianceCertificate cert;
      cert.sigma_sq = k_sigma_sq;
      cert.alpha = k_alpha;
      const auto rep =
          spg::check_step_condition(schedule, k_beta, cert, k_eps, k_horizon);
      std::printf("%s\n", rep.summary().c_str());
      return (rep.a3_satisfied && rep.a4_satisfied) ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
