#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "bliphasu/instance_io.hpp"
#include "bliphasu/pipeline.hpp"

namespace bliphasu {

enum class ExperimentKind { init_quality, success_rate };

inline std::string_view to_string(ExperimentKind k) {
  return k == ExperimentKind::init_quality ? "init-quality" : "success-rate";
}

/// One sweep over ratio x SNR x init-mode cells. nullopt in `snrs` stands for
/// noise-free measurements.
struct ExperimentConfig {
  std::size_t k = 10;
  std::size_t s = 10;
  // Full-resolution length; only used in convolutional mode (0 there is an error).
  std::size_t n = 0;
  SynthesisMode mode = SynthesisMode::direct_gaussian;
  std::vector<double> ratios{2, 4, 6, 8, 10};
  std::vector<std::optional<double>> snrs{std::nullopt};
  std::vector<InitMode> init_modes{InitMode::spectral};
  std::size_t trials = 50;
  std::size_t power_iters = kDefaultPowerIterations;
  // Refinement settings; seed is overridden per trial. Sweeps use full batches
  // and run the whole iteration budget, hence the tiny default tolerance.
  RefineConfig refine = [] {
    RefineConfig r;
    r.full_batch = true;
    r.tol = 1e-12;
    r.record_trace = false;
    return r;
  }();
  std::uint64_t seed = 0;
  double success_threshold = 1e-5;
  bool record_timing = true;
  // Worker threads for the trials; results do not depend on this.
  std::size_t threads = 1;

  void validate() const {
    if (k == 0 || s == 0) throw ConfigError("k and s must be >= 1");
    if (trials == 0) throw ConfigError("trials must be >= 1");
    if (ratios.empty()) throw ConfigError("ratio grid is empty");
    if (snrs.empty()) throw ConfigError("snr list is empty");
    if (init_modes.empty()) throw ConfigError("no init mode selected");
    if (power_iters == 0) throw ConfigError("power iterations must be >= 1");
    if (threads == 0) throw ConfigError("threads must be >= 1");
    for (double r : ratios) {
      if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("ratios must be positive");
    }
    if (mode == SynthesisMode::external) throw ConfigError("sweeps synthesize their instances");
    if (mode == SynthesisMode::convolutional) {
      for (double r : ratios) {
        if (!(measurement_count(r) < n)) {
          throw ConfigError("convolutional sweeps need n > m for every ratio (n=" +
                            std::to_string(n) + ")");
        }
      }
    }
  }

  /// m = ceil(ratio (k + s)), at least 1.
  std::size_t measurement_count(double ratio) const {
    const double raw = ratio * static_cast<double>(k + s);
    // guard against 40.000000001 -> 41 from the decimal ratio
    const auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(m, 1);
  }
};

struct CellKey {
  std::size_t ratio_index = 0;
  std::size_t snr_index = 0;
  InitMode init_mode = InitMode::spectral;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t m = 0;
  double init_error = std::numeric_limits<double>::quiet_NaN();
  // NaN when the trial failed before producing an estimate.
  double final_error = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
  bool failed = false;
  std::size_t iterations = 0;

  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    auto same = [](double x, double y) {
      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
    };
    return a.trial == b.trial && a.m == b.m && same(a.init_error, b.init_error) &&
           same(a.final_error, b.final_error) && a.success == b.success &&
           a.failed == b.failed && a.iterations == b.iterations;
  }
};

struct CellRecord {
  double ratio = 0.0;
  std::optional<double> snr_db;
  InitMode init_mode = InitMode::spectral;
  std::size_t trials = 0;
  double mean_pair_error = 0.0;
  double success_rate = 0.0;
  double mean_iterations = 0.0;
  std::optional<double> wall_time_s;
  std::vector<TrialRecord> rows;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::init_quality;
  std::vector<CellRecord> cells;
};

namespace harness_detail {

inline std::uint64_t key_of(double v) { return std::bit_cast<std::uint64_t>(v); }

inline std::uint64_t key_of(const std::optional<double>& snr) {
  return snr ? key_of(*snr) : 0xFFFF'FFFF'FFFF'FFFFULL;
}

}  // namespace harness_detail

/// Runs one trial of one cell. Streams are keyed by indices, not execution
/// order: the instance by (seed, ratio, trial), so SNR levels and init modes
/// see the same instance; noise and the algorithm also by snr.
inline TrialRecord run_trial(const ExperimentConfig& config, ExperimentKind kind,
                             const CellKey& cell, std::size_t trial) {
  using harness_detail::key_of;
  const double ratio = config.ratios.at(cell.ratio_index);
  const std::optional<double> snr = config.snrs.at(cell.snr_index);
  const std::size_t m = config.measurement_count(ratio);
  const std::uint64_t instance_key = stream_id({key_of(ratio), trial});
  const std::uint64_t base = stream_id({instance_key, key_of(snr)});

  SeededRng instance_rng(config.seed, stream_id({instance_key, 1}));
  const std::size_t n = config.mode == SynthesisMode::convolutional ? config.n : std::max(config.n, m);
  const ProblemInstance inst =
      synthesize_instance(n, config.k, config.s, m, config.mode, instance_rng);
  SeededRng noise_rng(config.seed, stream_id({base, 2}));
  const MeasurementSet meas = simulate_measurements(inst, snr, noise_rng);

  TrialRecord rec;
  rec.trial = trial;
  rec.m = m;
  RefineConfig refine = config.refine;
  refine.seed = stream_id({config.seed, base, 3});
  try {
    if (kind == ExperimentKind::init_quality) {
      const RVector y_eff = effective_measurements(meas.y, inst);
      const StartPoint sp =
          compute_start(y_eff, inst, config.power_iters, refine.seed, cell.init_mode);
      rec.init_error = pair_error(sp.start.g0, sp.start.z0, *inst.g_true, *inst.z_true);
      rec.final_error = rec.init_error;
    } else {
      const RecoveryResult res =
          recover(meas.y, inst, config.power_iters, refine, cell.init_mode);
      rec.init_error = pair_error(res.init.g0, res.init.z0, *inst.g_true, *inst.z_true);
      rec.final_error = pair_error(res.g_hat, res.z_hat, *inst.g_true, *inst.z_true);
      rec.iterations = res.refine.iterations;
    }
    rec.success = rec.final_error < config.success_threshold;
  } catch (const DivergenceError& e) {
    rec.failed = true;
    rec.iterations = e.iteration();
  } catch (const DegenerateSpectrumError&) {
    rec.failed = true;
  } catch (const DegenerateInputError&) {
    // zero g estimate from a collapsed z0 start
    rec.failed = true;
  }
  return rec;
}

/// Aggregates trial rows into one cell. Failed trials count as unsuccessful
/// and are left out of mean_pair_error (NaN if every trial failed).
inline CellRecord summarize_cell(double ratio, std::optional<double> snr, InitMode mode,
                                 std::vector<TrialRecord> rows,
                                 std::optional<double> wall_time_s) {
  CellRecord cell;
  cell.ratio = ratio;
  cell.snr_db = snr;
  cell.init_mode = mode;
  cell.trials = rows.size();
  double err_sum = 0.0, iter_sum = 0.0;
  std::size_t err_count = 0, successes = 0;
  for (const auto& r : rows) {
    if (!r.failed) {
      err_sum += r.final_error;
      ++err_count;
    }
    successes += r.success ? 1 : 0;
    iter_sum += static_cast<double>(r.iterations);
  }
  cell.mean_pair_error =
      err_count ? err_sum / static_cast<double>(err_count) : std::numeric_limits<double>::quiet_NaN();
  cell.success_rate = rows.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(rows.size());
  cell.mean_iterations = rows.empty() ? 0.0 : iter_sum / static_cast<double>(rows.size());
  cell.wall_time_s = wall_time_s;
  cell.rows = std::move(rows);
  return cell;
}

/// Cells ordered by (ratio, snr, init mode), trials by index. wall_time_s is
/// the summed per-trial compute time, so it does not depend on `threads`.
inline ExperimentReport run_experiment(const ExperimentConfig& config, ExperimentKind kind) {
  config.validate();
  std::vector<CellKey> cells;
  for (std::size_t ri = 0; ri < config.ratios.size(); ++ri) {
    for (std::size_t si = 0; si < config.snrs.size(); ++si) {
      for (InitMode mode : config.init_modes) cells.push_back({ri, si, mode});
    }
  }
  const std::size_t jobs = cells.size() * config.trials;
  std::vector<TrialRecord> rows(jobs);
  std::vector<double> seconds(jobs, 0.0);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      const auto start = std::chrono::steady_clock::now();
      try {
        rows[j] = run_trial(config, kind, cells[j / config.trials], j % config.trials);
      } catch (...) {
        errors[j] = std::current_exception();
      }
      seconds[j] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(config.threads, 1, jobs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.kind = kind;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto first = rows.begin() + static_cast<std::ptrdiff_t>(c * config.trials);
    std::optional<double> wall;
    if (config.record_timing) {
      wall = 0.0;
      for (std::size_t t = 0; t < config.trials; ++t) *wall += seconds[c * config.trials + t];
    }
    report.cells.push_back(summarize_cell(config.ratios[cells[c].ratio_index],
                                          config.snrs[cells[c].snr_index], cells[c].init_mode,
                                          std::vector<TrialRecord>(first, first + static_cast<std::ptrdiff_t>(config.trials)),
                                          wall));
  }
  return report;
}

/// Mean pair error of the starting points (g0, z0) only.
inline ExperimentReport experiment_init_quality(const ExperimentConfig& config) {
  return run_experiment(config, ExperimentKind::init_quality);
}

/// Success rate of the full pipeline; intended for noise-free cells.
inline ExperimentReport experiment_success_rate(const ExperimentConfig& config) {
  for (const auto& snr : config.snrs) {
    if (snr) throw ConfigError("success-rate sweeps are defined on noise-free measurements");
  }
  return run_experiment(config, ExperimentKind::success_rate);
}

struct RecoveryOptions {
  RefineConfig refine;
  std::size_t power_iters = kDefaultPowerIterations;
  InitMode init_mode = InitMode::spectral;
};

struct RecoveryReport {
  std::string source;
  RecoveryResult result;
  // Present when the file carries g_true and z_true.
  std::optional<double> init_pair_error;
  std::optional<double> pair_error;
};

/// Loads an instance file with measurements and runs the pipeline on it.
inline RecoveryReport recover_from_file(const std::string& path, const RecoveryOptions& options) {
  const InstanceFile file = load_instance(path);
  if (!file.measurements) {
    throw ValidationError(path + ": field 'measurements': required for recovery");
  }
  RecoveryReport rep;
  rep.source = path;
  rep.result = recover(file.measurements->y, file.instance, options.power_iters, options.refine,
                        options.init_mode);
  const ProblemInstance& inst = file.instance;
  if (inst.g_true && inst.z_true) {
    rep.init_pair_error = bliphasu::pair_error(rep.result.init.g0, rep.result.init.z0,
                                               *inst.g_true, *inst.z_true);
    rep.pair_error =
        bliphasu::pair_error(rep.result.g_hat, rep.result.z_hat, *inst.g_true, *inst.z_true);
  }
  return rep;
}

}  // namespace bliphasu
