#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bliphasu/harness.hpp"

namespace bliphasu {

enum class ReportFormat { csv, json, svg };

inline ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  if (text == "svg") return ReportFormat::svg;
  throw ConfigError("unknown format '" + std::string(text) + "'");
}

inline constexpr std::string_view kCsvHeader =
    "ratio,snr_db,init_mode,trials,mean_pair_error,success_rate,mean_iterations,wall_time_s";

/// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const ExperimentReport& report) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& c : report.cells) {
    out += format_number(c.ratio);
    out += ',';
    if (c.snr_db) out += format_number(*c.snr_db);
    out += ',';
    out += to_string(c.init_mode);
    out += ',';
    out += std::to_string(c.trials);
    out += ',';
    out += format_number(c.mean_pair_error);
    out += ',';
    out += format_number(c.success_rate);
    out += ',';
    out += format_number(c.mean_iterations);
    out += ',';
    if (c.wall_time_s) out += format_number(*c.wall_time_s);
    out += '\n';
  }
  return out;
}

namespace report_detail {

using nlohmann::json;

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_from(const json& j, const char* name) {
  if (!j.contains(name)) throw ParseError(std::string("report: missing field '") + name + "'");
  const json& v = j[name];
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ParseError(std::string("report: field '") + name + "' is not a number");
  return v.get<double>();
}

inline std::optional<double> optional_from(const json& j, const char* name) {
  if (!j.contains(name) || j[name].is_null()) return std::nullopt;
  return number_from(j, name);
}

inline std::size_t count_from(const json& j, const char* name) {
  if (!j.contains(name) || !j[name].is_number_unsigned()) {
    throw ParseError(std::string("report: field '") + name + "' must be a nonnegative integer");
  }
  return j[name].get<std::size_t>();
}

}  // namespace report_detail

inline nlohmann::json to_json(const ExperimentReport& report) {
  using report_detail::number_or_null;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : c.rows) {
      rows.push_back({{"trial", r.trial},
                      {"m", r.m},
                      {"init_error", number_or_null(r.init_error)},
                      {"final_error", number_or_null(r.final_error)},
                      {"success", r.success},
                      {"failed", r.failed},
                      {"iterations", r.iterations}});
    }
    cells.push_back({{"ratio", c.ratio},
                     {"snr_db", c.snr_db ? nlohmann::json(*c.snr_db) : nlohmann::json(nullptr)},
                     {"init_mode", std::string(to_string(c.init_mode))},
                     {"trials", c.trials},
                     {"mean_pair_error", number_or_null(c.mean_pair_error)},
                     {"success_rate", c.success_rate},
                     {"mean_iterations", c.mean_iterations},
                     {"wall_time_s", c.wall_time_s ? nlohmann::json(*c.wall_time_s)
                                                   : nlohmann::json(nullptr)},
                     {"rows", std::move(rows)}});
  }
  return {{"kind", std::string(to_string(report.kind))}, {"cells", std::move(cells)}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  using namespace report_detail;
  if (!j.is_object() || !j.contains("cells") || !j["cells"].is_array()) {
    throw ParseError("report: expected an object with a 'cells' array");
  }
  ExperimentReport rep;
  const std::string kind = j.value("kind", std::string("init-quality"));
  if (kind == "init-quality") {
    rep.kind = ExperimentKind::init_quality;
  } else if (kind == "success-rate") {
    rep.kind = ExperimentKind::success_rate;
  } else {
    throw ParseError("report: unknown kind '" + kind + "'");
  }
  for (const auto& cj : j["cells"]) {
    CellRecord c;
    c.ratio = number_from(cj, "ratio");
    c.snr_db = optional_from(cj, "snr_db");
    if (!cj.contains("init_mode") || !cj["init_mode"].is_string()) {
      throw ParseError("report: field 'init_mode' must be a string");
    }
    try {
      c.init_mode = parse_init_mode(cj["init_mode"].get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(std::string("report: ") + e.what());
    }
    c.trials = count_from(cj, "trials");
    c.mean_pair_error = number_from(cj, "mean_pair_error");
    c.success_rate = number_from(cj, "success_rate");
    c.mean_iterations = number_from(cj, "mean_iterations");
    c.wall_time_s = optional_from(cj, "wall_time_s");
    if (cj.contains("rows")) {
      for (const auto& rj : cj["rows"]) {
        TrialRecord r;
        r.trial = count_from(rj, "trial");
        r.m = count_from(rj, "m");
        r.init_error = number_from(rj, "init_error");
        r.final_error = number_from(rj, "final_error");
        r.success = rj.value("success", false);
        r.failed = rj.value("failed", false);
        r.iterations = count_from(rj, "iterations");
        c.rows.push_back(r);
      }
    }
    rep.cells.push_back(std::move(c));
  }
  return rep;
}

/// Minimal line plot: mean pair error (init-quality, log axis) or success rate
/// over the ratio axis, one poly-line per (snr, init mode) series.
inline std::string to_svg(const ExperimentReport& report) {
  constexpr double W = 640, H = 420, L = 70, R = 180, T = 30, B = 50;
  const bool log_y = report.kind == ExperimentKind::init_quality;
  auto value = [&](const CellRecord& c) {
    return log_y ? c.mean_pair_error : c.success_rate;
  };

  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& c : report.cells) {
    const double v = value(c);
    if (!std::isfinite(v) || (log_y && !(v > 0.0))) continue;
    const double yv = log_y ? std::log10(v) : v;
    const std::string snr = c.snr_db ? format_number(*c.snr_db) + " dB" : "noise-free";
    series[{snr, std::string(to_string(c.init_mode))}].emplace_back(c.ratio, yv);
    xmin = std::min(xmin, c.ratio);
    xmax = std::max(xmax, c.ratio);
    ymin = std::min(ymin, yv);
    ymax = std::max(ymax, yv);
  }
  if (!log_y) {
    ymin = 0.0;
    ymax = 1.0;
  } else if (series.empty()) {
    ymin = -1.0;
    ymax = 0.0;
  } else {
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    if (ymax <= ymin) ymax = ymin + 1.0;
  }
  if (series.empty()) {
    xmin = 0.0;
    xmax = 1.0;
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    os << "<text x=\"" << px(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
       << format_number(std::round(x * 100) / 100) << "</text>\n";
    const double y = ymin + (ymax - ymin) * i / 4.0;
    const std::string label = log_y ? "1e" + format_number(std::round(y * 100) / 100)
                                    : format_number(std::round(y * 100) / 100);
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << label
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\">m/(k+s)</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">" << (log_y ? "mean pair error" : "success rate")
     << "</text>\n";

  std::size_t idx = 0;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = kColors[idx % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (key.second == "random") os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
    }
    os << "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(idx);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << key.first << ", "
       << key.second << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string render_report(const ExperimentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv:
      return to_csv(report);
    case ReportFormat::json:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::svg:
      return to_svg(report);
  }
  return {};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline void emit_report(const ExperimentReport& report, ReportFormat format,
                        const std::string& path) {
  write_text(path, render_report(report, format));
}

inline nlohmann::json to_json(const RecoveryReport& rep) {
  using report_detail::number_or_null;
  const RecoveryResult& r = rep.result;
  auto vec = [](const CVector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : v) out.push_back({c.real(), c.imag()});
    return out;
  };
  nlohmann::json j;
  j["source"] = rep.source;
  j["g_hat"] = vec(r.g_hat);
  j["z_hat"] = vec(r.z_hat);
  if (r.h_hat) j["h_hat"] = vec(*r.h_hat);
  if (r.x_hat) j["x_hat"] = vec(*r.x_hat);
  j["lambda_g"] = r.init.lambda_g;
  j["lambda_z"] = r.init.lambda_z;
  j["alpha_g"] = r.steps.alpha_g;
  j["alpha_z"] = r.steps.alpha_z;
  j["iterations"] = r.refine.iterations;
  j["stop_reason"] = std::string(to_string(r.refine.stop_reason));
  if (rep.init_pair_error) j["init_pair_error"] = *rep.init_pair_error;
  if (rep.pair_error) j["pair_error"] = *rep.pair_error;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.refine.trace.records) {
    nlohmann::json tj{{"t", t.t},
                      {"objective", number_or_null(t.objective)},
                      {"dg_norm", t.dg_norm},
                      {"dz_norm", t.dz_norm}};
    if (t.pair_error) tj["pair_error"] = *t.pair_error;
    trace.push_back(std::move(tj));
  }
  j["trace"] = std::move(trace);
  return j;
}

}  // namespace bliphasu
