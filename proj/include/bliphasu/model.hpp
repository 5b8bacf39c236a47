#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bliphasu/complex_core.hpp"
#include "bliphasu/metrics.hpp"
#include "bliphasu/rng.hpp"

namespace bliphasu {

enum class SynthesisMode { direct_gaussian, convolutional, external };

inline std::string_view to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::direct_gaussian: return "direct-gaussian";
    case SynthesisMode::convolutional: return "convolutional";
    case SynthesisMode::external: return "external";
  }
  return "unknown";
}

inline SynthesisMode parse_synthesis_mode(std::string_view text) {
  if (text == "direct-gaussian") return SynthesisMode::direct_gaussian;
  if (text == "convolutional") return SynthesisMode::convolutional;
  if (text == "external") return SynthesisMode::external;
  throw ConfigError("unknown synthesis mode '" + std::string(text) + "'");
}

/// Subspace maps, dimensions and (optionally) the ground truth of one blind
/// deconvolution problem. Row l of Bhat is b_l^H, row l of Chat is c_l^H.
struct ProblemInstance {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t s = 0;
  std::size_t m = 0;
  SynthesisMode mode = SynthesisMode::direct_gaussian;
  std::optional<CMatrix> B;
  std::optional<CMatrix> C;
  CMatrix Bhat;
  CMatrix Chat;
  std::optional<CVector> g_true;
  std::optional<CVector> z_true;

  bool has_full_resolution() const noexcept { return B.has_value() && C.has_value(); }

  /// Ratio between the physical intensities |F_lo(x * h)|^2 and the Hadamard
  /// form |Bhat g . Chat z|^2. With the unitary DFT, F(x * h) = sqrt(n) Fx . Fh.
  double intensity_scale() const noexcept {
    return mode == SynthesisMode::convolutional ? static_cast<double>(n) : 1.0;
  }

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

struct MeasurementSet {
  RVector y;
  RVector clean;
  double noise_std = 0.0;
  std::optional<double> snr_db;
  std::uint64_t rng_seed = 0;
};

namespace detail {

inline void require_shape(const CMatrix& M, std::size_t rows, std::size_t cols,
                          const char* field) {
  if (M.rows() != rows || M.cols() != cols) {
    throw ValidationError(std::string(field) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + std::to_string(M.rows()) + "x" +
                          std::to_string(M.cols()));
  }
  if (!all_finite(M.data())) throw ValidationError(std::string(field) + ": non-finite entry");
}

inline double max_abs_deviation(const CMatrix& a, const CMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace detail

inline void ProblemInstance::validate() const {
  if (k == 0 || s == 0 || m == 0) throw ValidationError("k, s, m: must be positive");
  if (mode == SynthesisMode::convolutional && !(m < n)) {
    throw ValidationError("m: convolutional mode requires m < n (m=" + std::to_string(m) +
                          ", n=" + std::to_string(n) + ")");
  }
  detail::require_shape(Bhat, m, k, "Bhat");
  detail::require_shape(Chat, m, s, "Chat");
  if (B) detail::require_shape(*B, n, k, "B");
  if (C) detail::require_shape(*C, n, s, "C");
  if (B.has_value() != C.has_value()) throw ValidationError("B, C: must be given together");
  if (mode == SynthesisMode::convolutional) {
    if (!has_full_resolution()) throw ValidationError("B: convolutional mode requires B and C");
    if (detail::max_abs_deviation(partial_dft_columns(*B, m), Bhat) > 1e-10) {
      throw ValidationError("Bhat: does not equal F_lo B");
    }
    if (detail::max_abs_deviation(partial_dft_columns(*C, m), Chat) > 1e-10) {
      throw ValidationError("Chat: does not equal F_lo C");
    }
  }
  if (g_true) {
    if (g_true->size() != k) throw ValidationError("g_true: length must equal k");
    if (!all_finite(*g_true)) throw ValidationError("g_true: non-finite entry");
    if (std::abs(norm(*g_true) - 1.0) > 1e-10) throw ValidationError("g_true: must be unit norm");
  }
  if (z_true) {
    if (z_true->size() != s) throw ValidationError("z_true: length must equal s");
    if (!all_finite(*z_true)) throw ValidationError("z_true: non-finite entry");
  }
}

/// Draws a random instance. direct-gaussian: Bhat, Chat i.i.d. CN(0,1) and no
/// full-resolution maps. convolutional: B, C i.i.d. CN(0,1) (so F_lo B is
/// again CN(0, I) row-wise) and Bhat = F_lo B, Chat = F_lo C.
inline ProblemInstance synthesize_instance(std::size_t n, std::size_t k, std::size_t s,
                                           std::size_t m, SynthesisMode mode, SeededRng& rng) {
  if (k == 0 || s == 0 || m == 0) throw DimensionError("synthesize_instance: k, s, m must be >= 1");
  ProblemInstance inst;
  inst.n = n;
  inst.k = k;
  inst.s = s;
  inst.m = m;
  inst.mode = mode;
  switch (mode) {
    case SynthesisMode::direct_gaussian:
      inst.Bhat = sample_complex_gaussian_matrix(rng, m, k);
      inst.Chat = sample_complex_gaussian_matrix(rng, m, s);
      break;
    case SynthesisMode::convolutional:
      if (!(m < n)) {
        throw DimensionError("synthesize_instance: convolutional mode requires m < n");
      }
      inst.B = sample_complex_gaussian_matrix(rng, n, k);
      inst.C = sample_complex_gaussian_matrix(rng, n, s);
      inst.Bhat = partial_dft_columns(*inst.B, m);
      inst.Chat = partial_dft_columns(*inst.C, m);
      break;
    case SynthesisMode::external:
      throw ConfigError("synthesize_instance: external instances must be loaded from file");
  }
  CVector g = sample_complex_gaussian(rng, k);
  const double g_norm = norm(g);
  for (auto& c : g) c /= g_norm;
  inst.g_true = std::move(g);
  inst.z_true = sample_complex_gaussian(rng, s);
  return inst;
}

/// |(b_l^H g)(c_l^H z)|^2 for every row l.
inline RVector forward_intensities(const CMatrix& Bhat, const CMatrix& Chat,
                                   std::span<const Complex> g, std::span<const Complex> z) {
  if (Bhat.rows() != Chat.rows()) throw DimensionError("forward_intensities: Bhat/Chat row mismatch");
  if (Bhat.cols() != g.size() || Chat.cols() != z.size()) {
    throw DimensionError("forward_intensities: subspace dimension mismatch");
  }
  const CVector bg = matvec(Bhat, g);
  const CVector cz = matvec(Chat, z);
  RVector out(Bhat.rows());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = std::norm(bg[l]) * std::norm(cz[l]);
  return out;
}

/// |F_lo (Cz * Bg)|^2 evaluated through the explicit convolution. Equals
/// n * forward_intensities(F_lo B, F_lo C, g, z).
inline RVector forward_convolutional(const CMatrix& B, const CMatrix& C,
                                     std::span<const Complex> g, std::span<const Complex> z,
                                     std::size_t m) {
  if (B.rows() != C.rows()) throw DimensionError("forward_convolutional: B and C row mismatch");
  if (!(m < B.rows())) throw DimensionError("forward_convolutional: requires m < n");
  const CVector h = matvec(B, g);
  const CVector x = matvec(C, z);
  const CVector low = partial_dft(circular_convolve(x, h), m);
  RVector out(m);
  for (std::size_t l = 0; l < m; ++l) out[l] = std::norm(low[l]);
  return out;
}

/// Noise-free intensities of the instance's ground truth, through the path
/// that matches its synthesis mode.
inline RVector clean_intensities(const ProblemInstance& inst) {
  if (!inst.g_true || !inst.z_true) {
    throw DegenerateInputError("clean_intensities: instance has no ground truth");
  }
  if (inst.mode == SynthesisMode::convolutional) {
    return forward_convolutional(*inst.B, *inst.C, *inst.g_true, *inst.z_true, inst.m);
  }
  return forward_intensities(inst.Bhat, inst.Chat, *inst.g_true, *inst.z_true);
}

/// sigma with m sigma^2 = ||clean||^2 10^{-snr/10}; inverse of snr_db.
inline double noise_std_for_snr(std::span<const double> clean, double target_snr_db) {
  const double signal = squared_norm(clean);
  if (signal == 0.0) throw DegenerateInputError("noise_std_for_snr: clean intensities are all zero");
  return std::sqrt(signal * std::pow(10.0, -target_snr_db / 10.0) /
                   static_cast<double>(clean.size()));
}

/// y = clean + eta, eta i.i.d. N(0, noise_std^2). Negative samples are kept.
inline MeasurementSet add_noise(std::span<const double> clean, double noise_std, SeededRng& rng) {
  if (noise_std < 0.0) throw ConfigError("add_noise: noise_std must be nonnegative");
  MeasurementSet out;
  out.clean.assign(clean.begin(), clean.end());
  out.y = out.clean;
  out.noise_std = noise_std;
  out.rng_seed = rng.seed();
  if (noise_std > 0.0) {
    for (auto& v : out.y) v += noise_std * rng.standard_normal();
    if (squared_norm(clean) > 0.0) out.snr_db = snr_db(clean, noise_std, clean.size());
  }
  return out;
}

/// Clean intensities of the instance plus noise at the requested SNR
/// (nullopt = noise-free).
inline MeasurementSet simulate_measurements(const ProblemInstance& inst,
                                            std::optional<double> target_snr_db,
                                            SeededRng& rng) {
  const RVector clean = clean_intensities(inst);
  const double sigma = target_snr_db ? noise_std_for_snr(clean, *target_snr_db) : 0.0;
  MeasurementSet out = add_noise(clean, sigma, rng);
  if (target_snr_db) out.snr_db = *target_snr_db;
  return out;
}

}  // namespace bliphasu
