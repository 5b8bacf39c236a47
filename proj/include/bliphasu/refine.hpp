#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "bliphasu/complex_core.hpp"
#include "bliphasu/metrics.hpp"
#include "bliphasu/rng.hpp"
#include "bliphasu/spectral_init.hpp"

namespace bliphasu {

enum class StopRule {
  either_below,  // stop once ||d_g|| < tol or ||d_z|| < tol
  both_below,    // stop once ||d_g|| < tol and ||d_z|| < tol
};

enum class StopReason { converged, max_iters };

inline std::string_view to_string(StopReason r) {
  return r == StopReason::converged ? "converged" : "max-iters";
}

struct RefineConfig {
  // Unset step sizes come from curvature_step_sizes() at the start point.
  std::optional<double> alpha_g;
  std::optional<double> alpha_z;
  // Minibatch cardinality Q; unset means ceil(m / 10), full_batch means Q = m.
  std::optional<std::size_t> batch_size;
  bool full_batch = false;
  double tol = 1e-2;
  std::size_t max_iters = 500;
  std::uint64_t seed = 0;
  StopRule stop_rule = StopRule::either_below;
  bool record_trace = true;
};

struct StepSizes {
  double alpha_g;
  double alpha_z;
};

inline constexpr double kDefaultStepScale = 0.8;

/// Fixed step sizes from the curvature of the objective at a reference pair:
/// alpha_g = scale / lambda_max(M_g), alpha_z = scale / lambda_max(M_z) with
///   M_g = (1/m) sum |c_l^H z|^4 |b_l^H g|^2 b_l b_l^H,
///   M_z = (1/m) sum |b_l^H g|^4 |c_l^H z|^2 c_l c_l^H,
/// the Gauss-Newton blocks of the objective. Invariant to rescaling y and to
/// the (c g, z / conj(c)) ambiguity of the reference pair.
inline StepSizes curvature_step_sizes(std::span<const Complex> g, std::span<const Complex> z,
                                      const CMatrix& Bhat, const CMatrix& Chat,
                                      double scale = kDefaultStepScale) {
  const CVector bg = matvec(Bhat, g);
  const CVector cz = matvec(Chat, z);
  RVector wg(bg.size()), wz(bg.size());
  for (std::size_t l = 0; l < bg.size(); ++l) {
    const double a2 = std::norm(bg[l]);
    const double c2 = std::norm(cz[l]);
    wg[l] = c2 * c2 * a2;
    wz[l] = a2 * a2 * c2;
  }
  SeededRng rng(0, stream_id({0x63757276ULL /* "curv" */}));
  try {
    const double lg = power_iteration(build_correlation(wg, Bhat), 100, rng).eigenvalue;
    const double lz = power_iteration(build_correlation(wz, Chat), 100, rng).eigenvalue;
    if (!(lg > 0.0) || !(lz > 0.0)) throw DegenerateSpectrumError("nonpositive curvature");
    return {scale / lg, scale / lz};
  } catch (const DegenerateSpectrumError&) {
    throw DegenerateSpectrumError(
        "cannot derive step sizes from a reference pair with zero intensities; pass "
        "alpha_g/alpha_z explicitly");
  }
}

inline std::size_t default_batch_size(std::size_t m) { return (m + 9) / 10; }

struct IterateState {
  CVector g;
  CVector z;
  std::size_t t = 0;
  double dg_norm = 0.0;
  double dz_norm = 0.0;
};

struct TraceRecord {
  std::size_t t = 0;
  double objective = 0.0;
  double dg_norm = 0.0;
  double dz_norm = 0.0;
  std::optional<double> pair_error;
};

struct RefineTrace {
  std::vector<TraceRecord> records;
};

struct RefineResult {
  CVector g;
  CVector z;
  RefineTrace trace;
  StopReason stop_reason = StopReason::max_iters;
  std::size_t iterations = 0;
};

struct GroundTruth {
  std::span<const Complex> g;
  std::span<const Complex> z;
};

namespace detail {

inline void check_problem(std::span<const Complex> g, std::span<const Complex> z,
                          std::span<const double> y, const CMatrix& Bhat, const CMatrix& Chat) {
  if (Bhat.rows() != y.size() || Chat.rows() != y.size()) {
    throw DimensionError("refine: y length does not match the number of rows");
  }
  if (Bhat.cols() != g.size() || Chat.cols() != z.size()) {
    throw DimensionError("refine: g/z length does not match the subspace dimension");
  }
}

struct Directions {
  CVector dg;
  CVector dz;
};

// (1/m) sum over `batch` of the update terms; both sides evaluated at (g, z).
inline Directions directions(std::span<const Complex> g, std::span<const Complex> z,
                             std::span<const double> y, const CMatrix& Bhat, const CMatrix& Chat,
                             std::span<const std::size_t> batch) {
  Directions d{CVector(g.size()), CVector(z.size())};
  for (std::size_t l : batch) {
    const auto brow = Bhat.row(l);
    const auto crow = Chat.row(l);
    Complex a = 0.0;  // b_l^H g
    for (std::size_t p = 0; p < g.size(); ++p) a += brow[p] * g[p];
    Complex c = 0.0;  // c_l^H z
    for (std::size_t q = 0; q < z.size(); ++q) c += crow[q] * z[q];
    const double a2 = std::norm(a);
    const double c2 = std::norm(c);
    const double gamma = a2 * c2 - y[l];
    // b b^H g = conj(row) * a
    const Complex wg = gamma * c2 * a;
    const Complex wz = gamma * a2 * c;
    for (std::size_t p = 0; p < g.size(); ++p) d.dg[p] += wg * std::conj(brow[p]);
    for (std::size_t q = 0; q < z.size(); ++q) d.dz[q] += wz * std::conj(crow[q]);
  }
  const double inv_m = 1.0 / static_cast<double>(y.size());
  for (auto& v : d.dg) v *= inv_m;
  for (auto& v : d.dz) v *= inv_m;
  return d;
}

}  // namespace detail

/// f(g, z) = (1/2m) sum_l (y[l] - |(b_l^H g)(c_l^H z)|^2)^2.
inline double objective(std::span<const Complex> g, std::span<const Complex> z,
                        std::span<const double> y, const CMatrix& Bhat, const CMatrix& Chat) {
  detail::check_problem(g, z, y, Bhat, Chat);
  const CVector bg = matvec(Bhat, g);
  const CVector cz = matvec(Chat, z);
  double acc = 0.0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    const double r = y[l] - std::norm(bg[l]) * std::norm(cz[l]);
    acc += r * r;
  }
  return acc / (2.0 * static_cast<double>(y.size()));
}

/// gamma[l] = |(b_l^H g)(c_l^H z)|^2 - y[l], zero-based l.
inline double residual(std::size_t l, std::span<const Complex> g, std::span<const Complex> z,
                       std::span<const double> y, const CMatrix& Bhat, const CMatrix& Chat) {
  detail::check_problem(g, z, y, Bhat, Chat);
  if (l >= y.size()) {
    throw DimensionError("residual: index " + std::to_string(l) + " out of range [0, " +
                         std::to_string(y.size()) + ")");
  }
  Complex bg = 0.0, cz = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) bg += Bhat(l, p) * g[p];
  for (std::size_t q = 0; q < z.size(); ++q) cz += Chat(l, q) * z[q];
  return std::norm(bg) * std::norm(cz) - y[l];
}

struct Gradient {
  CVector g;
  CVector z;
};

/// Wirtinger gradient (d f / d conj(g), d f / d conj(z)) of the objective.
inline Gradient full_gradient(std::span<const Complex> g, std::span<const Complex> z,
                              std::span<const double> y, const CMatrix& Bhat,
                              const CMatrix& Chat) {
  detail::check_problem(g, z, y, Bhat, Chat);
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto d = detail::directions(g, z, y, Bhat, Chat, all);
  return {std::move(d.dg), std::move(d.dz)};
}

/// Uniform Q-subset of {0, ..., m-1} without replacement, sorted ascending.
inline std::vector<std::size_t> sample_minibatch(std::size_t m, std::size_t Q, SeededRng& rng) {
  if (Q == 0 || Q > m) {
    throw ConfigError("sample_minibatch: Q=" + std::to_string(Q) + " outside [1, " +
                      std::to_string(m) + "]");
  }
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (Q < m) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < Q; ++i) {
      const std::size_t j = i + rng.uniform_index(m - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(Q);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

/// One simultaneous minibatch update. dg_norm/dz_norm hold ||d_g||, ||d_z||
/// of the 1/m-scaled batch sums (before multiplication by the step size).
inline IterateState sgd_step(const IterateState& state, std::span<const std::size_t> batch,
                             const StepSizes& steps, std::span<const double> y,
                             const CMatrix& Bhat, const CMatrix& Chat) {
  detail::check_problem(state.g, state.z, y, Bhat, Chat);
  if (batch.empty()) throw ConfigError("sgd_step: empty minibatch");
  for (std::size_t l : batch) {
    if (l >= y.size()) throw ConfigError("sgd_step: batch index out of range");
  }
  const auto d = detail::directions(state.g, state.z, y, Bhat, Chat, batch);
  IterateState next;
  next.g = state.g;
  next.z = state.z;
  for (std::size_t p = 0; p < next.g.size(); ++p) next.g[p] -= steps.alpha_g * d.dg[p];
  for (std::size_t q = 0; q < next.z.size(); ++q) next.z[q] -= steps.alpha_z * d.dz[q];
  next.t = state.t + 1;
  next.dg_norm = norm(d.dg);
  next.dz_norm = norm(d.dz);
  return next;
}

inline StepSizes resolve_step_sizes(const RefineConfig& config, std::span<const Complex> g_ref,
                                    std::span<const Complex> z_ref, const CMatrix& Bhat,
                                    const CMatrix& Chat) {
  if (config.alpha_g && config.alpha_z) return {*config.alpha_g, *config.alpha_z};
  const StepSizes def = curvature_step_sizes(g_ref, z_ref, Bhat, Chat);
  return {config.alpha_g.value_or(def.alpha_g), config.alpha_z.value_or(def.alpha_z)};
}

/// Iterates sgd_step from (g0, z0) until the stop rule fires or max_iters
/// steps have been taken. Minibatches are drawn from the stream keyed by
/// config.seed.
inline RefineResult run_refinement(std::span<const Complex> g0, std::span<const Complex> z0,
                                   std::span<const double> y, const CMatrix& Bhat,
                                   const CMatrix& Chat, const RefineConfig& config,
                                   std::optional<GroundTruth> truth = {}) {
  detail::check_problem(g0, z0, y, Bhat, Chat);
  const std::size_t m = y.size();
  const std::size_t Q =
      config.full_batch ? m : config.batch_size.value_or(default_batch_size(m));
  if (Q == 0 || Q > m) throw ConfigError("refine: batch size Q must satisfy 1 <= Q <= m");
  if (!(config.tol > 0.0)) throw ConfigError("refine: tol must be positive");
  if (config.max_iters == 0) throw ConfigError("refine: max_iters must be >= 1");
  if (norm(g0) == 0.0 && norm(z0) == 0.0) throw DegenerateInputError("refine: zero start");
  const StepSizes steps = resolve_step_sizes(config, g0, z0, Bhat, Chat);
  if (!(steps.alpha_g > 0.0) || !(steps.alpha_z > 0.0)) {
    throw ConfigError("refine: step sizes must be positive");
  }

  SeededRng batch_rng(config.seed, stream_id({0x6D696E69ULL /* "mini" */}));
  std::vector<std::size_t> full;
  if (Q == m) {
    full.resize(m);
    std::iota(full.begin(), full.end(), std::size_t{0});
  }

  RefineResult out;
  IterateState state{CVector(g0.begin(), g0.end()), CVector(z0.begin(), z0.end())};
  while (true) {
    const std::vector<std::size_t> batch = Q == m ? full : sample_minibatch(m, Q, batch_rng);
    state = sgd_step(state, batch, steps, y, Bhat, Chat);
    if (!all_finite(state.g) || !all_finite(state.z) || !std::isfinite(state.dg_norm) ||
        !std::isfinite(state.dz_norm)) {
      throw DivergenceError("refine: non-finite iterate at iteration " + std::to_string(state.t) +
                                " (step size too large?)",
                            state.t);
    }
    if (config.record_trace) {
      TraceRecord rec{state.t, objective(state.g, state.z, y, Bhat, Chat), state.dg_norm,
                      state.dz_norm, std::nullopt};
      if (truth) rec.pair_error = pair_error(state.g, state.z, truth->g, truth->z);
      out.trace.records.push_back(rec);
    }
    if (state.t >= config.max_iters) {
      out.stop_reason = StopReason::max_iters;
      break;
    }
    const bool g_small = state.dg_norm < config.tol;
    const bool z_small = state.dz_norm < config.tol;
    const bool stop = config.stop_rule == StopRule::either_below ? (g_small || z_small)
                                                                  : (g_small && z_small);
    if (stop) {
      out.stop_reason = StopReason::converged;
      break;
    }
  }
  out.iterations = state.t;
  out.g = std::move(state.g);
  out.z = std::move(state.z);
  return out;
}

}  // namespace bliphasu
