#pragma once

#include <algorithm>
#include <cmath>

#include "bliphasu/complex_core.hpp"

namespace bliphasu {

/// min over theta of ||w1 e^{-j theta} - w2||. The minimizer is
/// theta = arg(w2^H w1); the difference is formed explicitly at that angle
/// since the expanded sqrt(|w1|^2 + |w2|^2 - 2|w1^H w2|) cancels to zero for
/// nearby vectors.
inline double dist(std::span<const Complex> w1, std::span<const Complex> w2) {
  detail::require_same_length(w1.size(), w2.size(), "dist");
  const Complex cross = hermitian_inner(w2, w1);
  const double mag = std::abs(cross);
  const Complex phase = mag > 0.0 ? std::conj(cross) / mag : Complex(1.0, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) acc += std::norm(w1[i] * phase - w2[i]);
  return std::sqrt(acc);
}

inline double relative_error(std::span<const Complex> w_est, std::span<const Complex> w_true) {
  const double ref = norm(w_true);
  if (ref == 0.0) throw DegenerateInputError("relative_error: reference vector has zero norm");
  return dist(w_est, w_true) / ref;
}

struct AlignedPair {
  CVector g;
  CVector z;
  double applied_scale = 1.0;  // ||g_est||
};

/// Resolves the (c g, z / conj(c)) ambiguity by moving g onto the unit sphere.
/// Products (b^H g)(c^H z) are unchanged.
inline AlignedPair align_scale(std::span<const Complex> g_est, std::span<const Complex> z_est) {
  const double g_norm = norm(g_est);
  if (g_norm == 0.0) throw DegenerateInputError("align_scale: g estimate is zero");
  return {scaled(g_est, 1.0 / g_norm), scaled(z_est, g_norm), g_norm};
}

/// dist(g, g*)/(2||g*||) + dist(z, z*)/(2||z*||), evaluated on the scale-aligned
/// estimate.
inline double pair_error(std::span<const Complex> g_est, std::span<const Complex> z_est,
                         std::span<const Complex> g_true, std::span<const Complex> z_true) {
  const AlignedPair a = align_scale(g_est, z_est);
  return 0.5 * relative_error(a.g, g_true) + 0.5 * relative_error(a.z, z_true);
}

/// SNR in dB with i.i.d. noise of standard deviation noise_std on each of the
/// m samples, so the total noise energy is m * noise_std^2.
inline double snr_db(std::span<const double> clean, double noise_std, std::size_t m) {
  const double signal = squared_norm(clean);
  if (signal == 0.0) throw DegenerateInputError("snr_db: clean intensities are all zero");
  if (!(noise_std > 0.0)) throw DegenerateInputError("snr_db: noise_std must be positive");
  return 10.0 * std::log10(signal / (static_cast<double>(m) * noise_std * noise_std));
}

}  // namespace bliphasu
