#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bliphasu/model.hpp"

namespace bliphasu {

// Instance file: a JSON object with integer n, k, s, m, string mode, matrices
// Bhat, Chat (and optionally B, C) as arrays of rows of [re, im] pairs,
// optional g_true / z_true as arrays of [re, im], and an optional
// "measurements" object {y, clean?, noise_std, seed, snr_db?}. Unknown fields
// are ignored. Doubles are written in shortest round-trip form.

struct InstanceFile {
  ProblemInstance instance;
  std::optional<MeasurementSet> measurements;
};

namespace io_detail {

using nlohmann::json;

inline json encode(std::span<const Complex> v) {
  json out = json::array();
  for (const auto& c : v) out.push_back(json::array({c.real(), c.imag()}));
  return out;
}

inline json encode(const CMatrix& M) {
  json out = json::array();
  for (std::size_t r = 0; r < M.rows(); ++r) out.push_back(encode(M.row(r)));
  return out;
}

inline const json& field(const json& obj, const std::string& name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError("missing field '" + name + "'");
  return *it;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
  return v;
}

inline std::size_t count(const json& obj, const std::string& name) {
  const json& j = field(obj, name);
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError("field '" + name + "': expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline Complex complex_entry(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [re, im]");
  return {number(j[0], where), number(j[1], where)};
}

inline CVector decode_vector(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("field '" + name + "': expected an array");
  CVector out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(complex_entry(j[i], "field '" + name + "'[" + std::to_string(i) + "]"));
  }
  return out;
}

inline CMatrix decode_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ParseError("field '" + name + "': expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<Complex> data;
  for (std::size_t r = 0; r < rows; ++r) {
    const CVector row = decode_vector(j[r], name + "[" + std::to_string(r) + "]");
    if (r == 0) cols = row.size();
    if (row.size() != cols) {
      throw ValidationError("field '" + name + "': row " + std::to_string(r) + " has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(cols));
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return CMatrix(rows, cols, std::move(data));
}

inline RVector decode_real(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("field '" + name + "': expected an array");
  RVector out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], "field '" + name + "'[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace io_detail

inline nlohmann::json instance_to_json(const ProblemInstance& inst,
                                       const MeasurementSet* meas = nullptr) {
  using io_detail::encode;
  nlohmann::json j;
  j["n"] = inst.n;
  j["k"] = inst.k;
  j["s"] = inst.s;
  j["m"] = inst.m;
  j["mode"] = std::string(to_string(inst.mode));
  if (inst.B) j["B"] = encode(*inst.B);
  if (inst.C) j["C"] = encode(*inst.C);
  j["Bhat"] = encode(inst.Bhat);
  j["Chat"] = encode(inst.Chat);
  if (inst.g_true) j["g_true"] = encode(*inst.g_true);
  if (inst.z_true) j["z_true"] = encode(*inst.z_true);
  if (meas) {
    nlohmann::json mj;
    mj["y"] = meas->y;
    if (!meas->clean.empty()) mj["clean"] = meas->clean;
    mj["noise_std"] = meas->noise_std;
    mj["seed"] = meas->rng_seed;
    if (meas->snr_db) mj["snr_db"] = *meas->snr_db;
    j["measurements"] = std::move(mj);
  }
  return j;
}

inline InstanceFile instance_from_json(const nlohmann::json& j) {
  using namespace io_detail;
  if (!j.is_object()) throw ParseError("instance file: top level must be an object");
  InstanceFile out;
  ProblemInstance& inst = out.instance;
  inst.n = count(j, "n");
  inst.k = count(j, "k");
  inst.s = count(j, "s");
  inst.m = count(j, "m");
  const json& mode = field(j, "mode");
  if (!mode.is_string()) throw ParseError("field 'mode': expected a string");
  try {
    inst.mode = parse_synthesis_mode(mode.get<std::string>());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("field 'mode': ") + e.what());
  }
  inst.Bhat = decode_matrix(field(j, "Bhat"), "Bhat");
  inst.Chat = decode_matrix(field(j, "Chat"), "Chat");
  if (j.contains("B")) inst.B = decode_matrix(j["B"], "B");
  if (j.contains("C")) inst.C = decode_matrix(j["C"], "C");
  if (j.contains("g_true")) inst.g_true = decode_vector(j["g_true"], "g_true");
  if (j.contains("z_true")) inst.z_true = decode_vector(j["z_true"], "z_true");
  inst.validate();

  if (j.contains("measurements")) {
    const json& mj = j["measurements"];
    if (!mj.is_object()) throw ParseError("field 'measurements': expected an object");
    MeasurementSet meas;
    meas.y = decode_real(field(mj, "y"), "measurements.y");
    if (meas.y.size() != inst.m) {
      throw ValidationError("field 'measurements.y': length " + std::to_string(meas.y.size()) +
                            " does not match m=" + std::to_string(inst.m));
    }
    if (mj.contains("clean")) {
      meas.clean = decode_real(mj["clean"], "measurements.clean");
      if (meas.clean.size() != inst.m) {
        throw ValidationError("field 'measurements.clean': length does not match m");
      }
    }
    meas.noise_std = mj.contains("noise_std") ? number(mj["noise_std"], "measurements.noise_std") : 0.0;
    if (meas.noise_std < 0.0) throw ValidationError("field 'measurements.noise_std': negative");
    if (mj.contains("seed")) {
      if (!mj["seed"].is_number_unsigned()) {
        throw ParseError("field 'measurements.seed': expected a nonnegative integer");
      }
      meas.rng_seed = mj["seed"].get<std::uint64_t>();
    }
    if (mj.contains("snr_db") && !mj["snr_db"].is_null()) {
      meas.snr_db = number(mj["snr_db"], "measurements.snr_db");
    }
    out.measurements = std::move(meas);
  }
  return out;
}

inline void save_instance(const ProblemInstance& inst, const MeasurementSet* meas,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << instance_to_json(inst, meas).dump() << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline InstanceFile parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed instance file: ") + e.what());
  }
  return instance_from_json(j);
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << is.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace bliphasu
