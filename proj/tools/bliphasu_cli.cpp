// Command-line front end: simulate, recover, init-quality, success-rate.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "bliphasu.hpp"

namespace {

using namespace bliphasu;

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kDivergence = 3 };

struct Common {
  std::uint64_t seed = 0;
  std::string q = "";
  std::optional<double> alpha_g, alpha_z;
  std::optional<double> tol;
  std::size_t max_iters = 500;
  std::size_t power_iters = kDefaultPowerIterations;
  std::string stop_rule = "either";
  std::string out;
};

void add_refine_flags(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--q", c.q, "minibatch size: integer or 'full'");
  app->add_option("--alpha-g", c.alpha_g, "step size for g (default: curvature rule)")
      ->check(CLI::PositiveNumber);
  app->add_option("--alpha-z", c.alpha_z, "step size for z (default: curvature rule)")
      ->check(CLI::PositiveNumber);
  app->add_option("--tol", c.tol, "stopping tolerance on the direction norms")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-iters", c.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  app->add_option("--power-iters", c.power_iters, "power iterations for the initializer")
      ->check(CLI::PositiveNumber);
  app->add_option("--stop-rule", c.stop_rule, "either|both: which norm(s) must drop below tol")
      ->check(CLI::IsMember({"either", "both"}));
  app->add_option("--out", c.out, "output path (default: stdout)");
}

// An empty --q keeps the library default unless `full_default` is set.
void apply_q(const std::string& text, bool full_default, RefineConfig& r) {
  if (text.empty()) {
    r.full_batch = full_default;
    return;
  }
  if (text == "full") {
    r.full_batch = true;
    return;
  }
  std::size_t q = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), q);
  if (ec != std::errc() || p != text.data() + text.size() || q == 0) {
    throw ConfigError("--q must be a positive integer or 'full'");
  }
  r.batch_size = q;
}

RefineConfig refine_from(const Common& c) {
  RefineConfig r;
  r.alpha_g = c.alpha_g;
  r.alpha_z = c.alpha_z;
  if (c.tol) r.tol = *c.tol;
  r.max_iters = c.max_iters;
  r.seed = c.seed;
  r.stop_rule = c.stop_rule == "both" ? StopRule::both_below : StopRule::either_below;
  return r;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text(path, text);
  }
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      throw ConfigError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return out;
}

std::vector<std::optional<double>> parse_snr_list(const std::string& text) {
  std::vector<std::optional<double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "noise-free" || item == "inf") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_list(item, "--snr-list").front());
    }
  }
  if (out.empty()) throw ConfigError("--snr-list: empty list");
  return out;
}

std::vector<InitMode> parse_init_modes(const std::string& text) {
  if (text == "both") return {InitMode::spectral, InitMode::random};
  return {parse_init_mode(text)};
}

struct SweepFlags {
  std::size_t k = 10, s = 10, n = 0, trials = 50;
  std::string ratio_grid = "2,4,6,8,10";
  std::string snr_list = "noise-free";
  std::string init;
  std::string mode = "direct-gaussian";
  std::string format = "csv";
  std::size_t threads = 1;
  bool no_timing = false;
};

void add_sweep_flags(CLI::App* app, SweepFlags& f, bool with_snr) {
  app->add_option("--k", f.k, "kernel subspace dimension")->check(CLI::PositiveNumber);
  app->add_option("--s", f.s, "signal subspace dimension")->check(CLI::PositiveNumber);
  app->add_option("--n", f.n, "full-resolution length (convolutional mode)");
  app->add_option("--mode", f.mode, "direct-gaussian|convolutional")
      ->check(CLI::IsMember({"direct-gaussian", "convolutional"}));
  app->add_option("--ratio-grid", f.ratio_grid, "comma-separated m/(k+s) values");
  if (with_snr) {
    app->add_option("--snr-list", f.snr_list, "comma-separated SNRs in dB, or 'noise-free'");
  }
  app->add_option("--trials", f.trials, "trials per cell")->check(CLI::PositiveNumber);
  app->add_option("--init", f.init, "spectral|random|both")
      ->check(CLI::IsMember({"spectral", "random", "both"}));
  app->add_option("--format", f.format, "csv|json|svg")->check(CLI::IsMember({"csv", "json", "svg"}));
  app->add_option("--threads", f.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app->add_flag("--no-timing", f.no_timing, "leave wall_time_s empty (byte-reproducible output)");
}

ExperimentConfig sweep_config(const SweepFlags& f, const Common& c, bool with_snr,
                              const std::string& default_init) {
  ExperimentConfig cfg;
  cfg.k = f.k;
  cfg.s = f.s;
  cfg.n = f.n;
  cfg.mode = parse_synthesis_mode(f.mode);
  cfg.ratios = parse_list(f.ratio_grid, "--ratio-grid");
  cfg.snrs = with_snr ? parse_snr_list(f.snr_list) : std::vector<std::optional<double>>{std::nullopt};
  cfg.init_modes = parse_init_modes(f.init.empty() ? default_init : f.init);
  cfg.trials = f.trials;
  cfg.power_iters = c.power_iters;
  cfg.seed = c.seed;
  cfg.record_timing = !f.no_timing;
  cfg.threads = f.threads;
  RefineConfig r = refine_from(c);
  r.tol = c.tol.value_or(1e-12);
  r.record_trace = false;
  apply_q(c.q, true, r);
  cfg.refine = r;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind deconvolutional phase retrieval via stochastic refinement"};
  app.require_subcommand(1);

  Common common;
  SweepFlags sweep;

  auto* simulate = app.add_subcommand("simulate", "synthesize an instance and its measurements");
  std::size_t sim_n = 64, sim_k = 8, sim_s = 8, sim_m = 0;
  std::optional<double> sim_ratio, sim_snr;
  std::string sim_mode = "convolutional";
  simulate->add_option("--n", sim_n, "full-resolution length");
  simulate->add_option("--k", sim_k)->check(CLI::PositiveNumber);
  simulate->add_option("--s", sim_s)->check(CLI::PositiveNumber);
  simulate->add_option("--m", sim_m, "number of measurements");
  simulate->add_option("--ratio", sim_ratio, "m/(k+s), alternative to --m");
  simulate->add_option("--snr", sim_snr, "SNR in dB (default: noise-free)");
  simulate->add_option("--mode", sim_mode, "direct-gaussian|convolutional")
      ->check(CLI::IsMember({"direct-gaussian", "convolutional"}));
  simulate->add_option("--seed", common.seed, "master seed");
  simulate->add_option("--out", common.out, "instance file (default: stdout)");

  auto* recover = app.add_subcommand("recover", "run the solver on an instance file");
  std::string in_path, rec_init = "spectral";
  recover->add_option("--in", in_path, "instance file")->required();
  recover->add_option("--init", rec_init, "spectral|random")
      ->check(CLI::IsMember({"spectral", "random"}));
  add_refine_flags(recover, common);

  auto* init_quality = app.add_subcommand("init-quality", "initializer error sweep");
  add_sweep_flags(init_quality, sweep, true);
  add_refine_flags(init_quality, common);

  auto* success = app.add_subcommand("success-rate", "noise-free recovery success sweep");
  add_sweep_flags(success, sweep, false);
  add_refine_flags(success, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (simulate->parsed()) {
      std::size_t m = sim_m;
      if (sim_ratio) m = static_cast<std::size_t>(std::ceil(*sim_ratio * (sim_k + sim_s) - 1e-9));
      if (m == 0) throw ConfigError("simulate: give --m or --ratio");
      SeededRng rng(common.seed, stream_id({1}));
      const ProblemInstance inst =
          synthesize_instance(sim_n, sim_k, sim_s, m, parse_synthesis_mode(sim_mode), rng);
      SeededRng noise(common.seed, stream_id({2}));
      const MeasurementSet meas = simulate_measurements(inst, sim_snr, noise);
      write_output(common.out, instance_to_json(inst, &meas).dump() + "\n");
    } else if (recover->parsed()) {
      RecoveryOptions opts;
      opts.refine = refine_from(common);
      opts.power_iters = common.power_iters;
      opts.init_mode = parse_init_mode(rec_init);
      apply_q(common.q, false, opts.refine);
      const RecoveryReport rep = recover_from_file(in_path, opts);
      write_output(common.out, to_json(rep).dump(2) + "\n");
    } else {
      const bool is_init = init_quality->parsed();
      const ExperimentConfig cfg =
          sweep_config(sweep, common, is_init, is_init ? "spectral" : "both");
      const ExperimentReport rep =
          is_init ? experiment_init_quality(cfg) : experiment_success_rate(cfg);
      write_output(common.out, render_report(rep, parse_report_format(sweep.format)));
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
