#include "test_support.hpp"

#include <fstream>
#include <sstream>

using namespace bliphasu;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentReport known_report() {
  ExperimentReport rep;
  rep.kind = ExperimentKind::success_rate;
  CellRecord a;
  a.ratio = 2;
  a.init_mode = InitMode::spectral;
  a.trials = 4;
  a.mean_pair_error = 0.125;
  a.success_rate = 0.25;
  a.mean_iterations = 500;
  a.wall_time_s = 1.5;
  CellRecord b;
  b.ratio = 2.5;
  b.snr_db = 10;
  b.init_mode = InitMode::random;
  b.trials = 3;
  b.mean_pair_error = 0.1;
  b.success_rate = 1.0 / 3.0;
  b.mean_iterations = 312.5;
  TrialRecord r;
  r.trial = 0;
  r.m = 20;
  r.init_error = 0.9;
  r.final_error = 1e-6;
  r.success = true;
  r.iterations = 500;
  b.rows = {r};
  rep.cells = {a, b};
  return rep;
}

TEST(Csv, HeaderOnlyForEmptyReport) {
  EXPECT_EQ(to_csv(ExperimentReport{}),
            "ratio,snr_db,init_mode,trials,mean_pair_error,success_rate,mean_iterations,"
            "wall_time_s\n");
}

TEST(Csv, MatchesGoldenFixture) {
  EXPECT_EQ(to_csv(known_report()), read_file(FIXTURE_DIR "/known_report.csv"));
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 2.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Json, RoundTripPreservesSharedFields) {
  const ExperimentReport rep = known_report();
  const ExperimentReport back = report_from_json(nlohmann::json::parse(to_json(rep).dump()));
  EXPECT_EQ(to_csv(back), to_csv(rep));
  EXPECT_EQ(back.kind, rep.kind);
  ASSERT_EQ(back.cells[1].rows.size(), 1u);
  EXPECT_EQ(back.cells[1].rows[0], rep.cells[1].rows[0]);
}

TEST(Json, NanBecomesNull) {
  ExperimentReport rep = known_report();
  rep.cells[0].mean_pair_error = std::nan("");
  const nlohmann::json j = to_json(rep);
  EXPECT_TRUE(j["cells"][0]["mean_pair_error"].is_null());
  EXPECT_TRUE(std::isnan(report_from_json(j).cells[0].mean_pair_error));
}

TEST(Json, RejectsMalformed) {
  EXPECT_THROW(report_from_json(nlohmann::json::array()), ParseError);
  EXPECT_THROW(report_from_json(nlohmann::json{{"cells", {{{"ratio", "x"}}}}}), ParseError);
}

TEST(Svg, OnePolylinePerSeries) {
  ExperimentReport rep;
  rep.kind = ExperimentKind::init_quality;
  for (double r : {2.0, 4.0, 6.0}) {
    for (std::optional<double> snr : {std::optional<double>{}, std::optional<double>{10.0}}) {
      CellRecord c;
      c.ratio = r;
      c.snr_db = snr;
      c.trials = 1;
      c.mean_pair_error = 1.0 / r;
      rep.cells.push_back(c);
    }
  }
  const std::string svg = to_svg(rep);
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(svg.find("noise-free, spectral"), std::string::npos);
  EXPECT_NE(svg.find("10 dB, spectral"), std::string::npos);
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Svg, EmptyReportStillRenders) {
  EXPECT_NE(to_svg(ExperimentReport{}).find("</svg>"), std::string::npos);
}

TEST(EmitReport, UnwritablePathNamesPath) {
  try {
    emit_report(known_report(), ReportFormat::csv, "/nonexistent-dir/out.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/out.csv"), std::string::npos);
  }
}

TEST(EmitReport, SweepCsvIsByteReproducible) {
  ExperimentConfig c;
  c.k = 2;
  c.s = 2;
  c.ratios = {3, 6};
  c.init_modes = {InitMode::spectral, InitMode::random};
  c.trials = 2;
  c.refine.max_iters = 30;
  c.record_timing = false;
  EXPECT_EQ(to_csv(experiment_success_rate(c)), to_csv(experiment_success_rate(c)));
}

TEST(ReportFormat, Parse) {
  EXPECT_EQ(parse_report_format("svg"), ReportFormat::svg);
  EXPECT_THROW(parse_report_format("xml"), ConfigError);
}

}  // namespace
