#include "test_support.hpp"

#include <cstdio>
#include <filesystem>

using namespace bliphasu;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.k = 3;
  c.s = 3;
  c.ratios = {4, 8};
  c.trials = 3;
  c.refine.max_iters = 40;
  c.seed = 11;
  c.record_timing = false;
  return c;
}

TEST(ExperimentConfig, MeasurementCount) {
  ExperimentConfig c;
  c.k = 10;
  c.s = 10;
  EXPECT_EQ(c.measurement_count(2.0), 40u);
  EXPECT_EQ(c.measurement_count(2.01), 41u);
  EXPECT_EQ(c.measurement_count(0.001), 1u);
  c.k = c.s = 3;
  EXPECT_EQ(c.measurement_count(0.7), 5u);
  EXPECT_EQ(c.measurement_count(0.1 * 3), 2u);
}

TEST(ExperimentConfig, Validation) {
  ExperimentConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.ratios = {2.0, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.init_modes.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.mode = SynthesisMode::convolutional;
  c.n = 30;
  EXPECT_THROW(c.validate(), ConfigError);  // ratio 8 gives m = 48 >= n
  c.n = 64;
  EXPECT_NO_THROW(c.validate());
}

TEST(RunTrial, Deterministic) {
  const ExperimentConfig c = small_config();
  for (auto kind : {ExperimentKind::init_quality, ExperimentKind::success_rate}) {
    const TrialRecord a = run_trial(c, kind, {1, 0, InitMode::spectral}, 2);
    const TrialRecord b = run_trial(c, kind, {1, 0, InitMode::spectral}, 2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.m, 48u);
  }
}

TEST(RunTrial, IndependentOfOrderAndOfOtherCells) {
  ExperimentConfig c = small_config();
  const ExperimentReport rep = experiment_success_rate(c);
  // Same trial computed alone, in reverse, and inside a sweep with a
  // different ratio grid and more trials.
  for (std::size_t t = c.trials; t-- > 0;) {
    EXPECT_EQ(run_trial(c, ExperimentKind::success_rate, {1, 0, InitMode::spectral}, t),
              rep.cells[1].rows[t]);
  }
  ExperimentConfig wider = c;
  wider.ratios = {8, 4, 6};
  wider.trials = 5;
  const ExperimentReport other = experiment_success_rate(wider);
  for (std::size_t t = 0; t < c.trials; ++t) {
    EXPECT_EQ(other.cells[0].rows[t], rep.cells[1].rows[t]);
    EXPECT_EQ(other.cells[1].rows[t], rep.cells[0].rows[t]);
  }
}

TEST(RunTrial, InitModesShareTheInstance) {
  ExperimentConfig c = small_config();
  c.init_modes = {InitMode::spectral, InitMode::random};
  const ExperimentReport rep = experiment_init_quality(c);
  ASSERT_EQ(rep.cells.size(), 4u);
  // Same instance, different start: errors differ but m agrees.
  EXPECT_EQ(rep.cells[0].rows[0].m, rep.cells[1].rows[0].m);
  EXPECT_NE(rep.cells[0].rows[0].init_error, rep.cells[1].rows[0].init_error);
}

TEST(RunTrial, DivergenceIsRecordedAsFailure) {
  ExperimentConfig c = small_config();
  c.refine.alpha_g = 1e8;
  c.refine.alpha_z = 1e8;
  const TrialRecord r = run_trial(c, ExperimentKind::success_rate, {0, 0, InitMode::spectral}, 0);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.success);
  EXPECT_TRUE(std::isnan(r.final_error));
  EXPECT_GE(r.iterations, 1u);
}

TEST(Experiments, CellAccounting) {
  ExperimentConfig c = small_config();
  c.ratios = {5};
  c.trials = 1;
  const ExperimentReport one = experiment_init_quality(c);
  ASSERT_EQ(one.cells.size(), 1u);
  EXPECT_EQ(one.cells[0].trials, 1u);
  EXPECT_EQ(one.cells[0].rows.size(), 1u);

  c = small_config();
  c.snrs = {std::nullopt, 10.0, 30.0};
  c.init_modes = {InitMode::spectral, InitMode::random};
  const ExperimentReport full = experiment_init_quality(c);
  ASSERT_EQ(full.cells.size(), 2u * 3u * 2u);
  // ordered by (ratio, snr, mode)
  EXPECT_EQ(full.cells[0].ratio, 4.0);
  EXPECT_FALSE(full.cells[0].snr_db.has_value());
  EXPECT_EQ(full.cells[1].init_mode, InitMode::random);
  EXPECT_EQ(full.cells[2].snr_db, 10.0);
  EXPECT_EQ(full.cells[6].ratio, 8.0);
  for (const auto& cell : full.cells) {
    EXPECT_GE(cell.success_rate, 0.0);
    EXPECT_LE(cell.success_rate, 1.0);
    EXPECT_EQ(cell.rows.size(), c.trials);
    EXPECT_FALSE(cell.wall_time_s.has_value());
  }
}

TEST(Experiments, InitQualityDoesNotRefine) {
  const ExperimentReport rep = experiment_init_quality(small_config());
  for (const auto& cell : rep.cells) {
    EXPECT_EQ(cell.mean_iterations, 0.0);
    for (const auto& r : cell.rows) EXPECT_EQ(r.init_error, r.final_error);
  }
}

TEST(Experiments, SuccessRateRejectsNoise) {
  ExperimentConfig c = small_config();
  c.snrs = {20.0};
  EXPECT_THROW(experiment_success_rate(c), ConfigError);
}

TEST(Experiments, TimingRecordedOnRequest) {
  ExperimentConfig c = small_config();
  c.record_timing = true;
  c.trials = 1;
  const ExperimentReport rep = experiment_init_quality(c);
  ASSERT_TRUE(rep.cells[0].wall_time_s.has_value());
  EXPECT_GE(*rep.cells[0].wall_time_s, 0.0);
}

TEST(SummarizeCell, ExcludesFailedTrialsFromMeanError) {
  std::vector<TrialRecord> rows(3);
  rows[0].final_error = 0.2;
  rows[0].iterations = 10;
  rows[1].final_error = 1e-7;
  rows[1].success = true;
  rows[1].iterations = 20;
  rows[2].failed = true;
  rows[2].iterations = 3;
  const CellRecord c = summarize_cell(2.0, std::nullopt, InitMode::spectral, rows, std::nullopt);
  EXPECT_NEAR(c.mean_pair_error, (0.2 + 1e-7) / 2, 1e-15);
  EXPECT_NEAR(c.success_rate, 1.0 / 3, 1e-15);
  EXPECT_NEAR(c.mean_iterations, 11.0, 1e-15);
}

TEST(RecoverFromFile, MatchesInMemoryPipelineBitForBit) {
  SeededRng rng(41);
  const ProblemInstance inst = synthesize_instance(48, 3, 3, 30, SynthesisMode::convolutional, rng);
  SeededRng noise(42);
  const MeasurementSet meas = simulate_measurements(inst, std::nullopt, noise);
  const std::string path =
      (std::filesystem::temp_directory_path() / "bliphasu_recover.json").string();
  save_instance(inst, &meas, path);

  RecoveryOptions opts;
  opts.refine.seed = 17;
  opts.refine.max_iters = 80;
  const RecoveryReport rep = recover_from_file(path, opts);
  const RecoveryResult mem = recover(meas.y, inst, opts.power_iters, opts.refine);
  EXPECT_EQ(rep.result.g_hat, mem.g_hat);
  EXPECT_EQ(rep.result.z_hat, mem.z_hat);
  ASSERT_TRUE(rep.result.x_hat.has_value());
  EXPECT_EQ(*rep.result.x_hat, *mem.x_hat);
  ASSERT_TRUE(rep.pair_error.has_value());
  EXPECT_EQ(*rep.pair_error, pair_error(mem.g_hat, mem.z_hat, *inst.g_true, *inst.z_true));

  const nlohmann::json j = to_json(rep);
  EXPECT_TRUE(j.contains("pair_error"));
  EXPECT_TRUE(j.contains("h_hat"));
  EXPECT_EQ(j["trace"].size(), rep.result.refine.trace.records.size());
  std::remove(path.c_str());
}

TEST(RecoverFromFile, LowDimensionalOnlyWithoutSubspaces) {
  SeededRng rng(43);
  ProblemInstance inst = synthesize_instance(0, 2, 2, 20, SynthesisMode::direct_gaussian, rng);
  SeededRng noise(44);
  const MeasurementSet meas = simulate_measurements(inst, std::nullopt, noise);
  inst.g_true.reset();
  inst.z_true.reset();
  const std::string path =
      (std::filesystem::temp_directory_path() / "bliphasu_recover_low.json").string();
  save_instance(inst, &meas, path);
  RecoveryOptions opts;
  opts.refine.max_iters = 10;
  const RecoveryReport rep = recover_from_file(path, opts);
  const nlohmann::json j = to_json(rep);
  EXPECT_FALSE(j.contains("h_hat"));
  EXPECT_FALSE(j.contains("x_hat"));
  EXPECT_FALSE(j.contains("pair_error"));
  EXPECT_TRUE(j.contains("g_hat"));
  std::remove(path.c_str());
}

TEST(RecoverFromFile, Errors) {
  RecoveryOptions opts;
  EXPECT_THROW(recover_from_file("/nonexistent/instance.json", opts), IoError);
  SeededRng rng(45);
  const ProblemInstance inst = synthesize_instance(0, 2, 2, 5, SynthesisMode::direct_gaussian, rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "bliphasu_no_meas.json").string();
  save_instance(inst, nullptr, path);
  EXPECT_THROW(recover_from_file(path, opts), ValidationError);
  std::remove(path.c_str());
}

}  // namespace

namespace {

TEST(Experiments, ThreadCountDoesNotChangeRecords) {
  bliphasu::ExperimentConfig c;
  c.k = 3;
  c.s = 3;
  c.ratios = {4, 7};
  c.init_modes = {bliphasu::InitMode::spectral, bliphasu::InitMode::random};
  c.trials = 4;
  c.refine.max_iters = 40;
  c.record_timing = false;
  const auto serial = bliphasu::experiment_success_rate(c);
  c.threads = 3;
  const auto parallel = bliphasu::experiment_success_rate(c);
  ASSERT_EQ(serial.cells.size(), parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    EXPECT_EQ(serial.cells[i].rows, parallel.cells[i].rows);
  }
  EXPECT_EQ(bliphasu::to_csv(serial), bliphasu::to_csv(parallel));
}

}  // namespace
