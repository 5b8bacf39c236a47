#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bliphasu/complex_core.hpp"
#include "bliphasu/rng.hpp"

namespace bliphasu {

enum class CorrelationSide { g_side, z_side };

/// H = (1/m) sum_l y[l] a_l a_l^H, with a_l^H the l-th row of the subspace map.
struct CorrelationMatrix {
  CMatrix H;
  CorrelationSide side = CorrelationSide::g_side;

  std::size_t dim() const noexcept { return H.rows(); }
};

struct EigenEstimate {
  double eigenvalue = 0.0;
  CVector eigenvector;
  std::size_t iterations_used = 0;
};

struct PowerIterationOptions {
  // 0 disables early exit: exactly `iters` rounds are run.
  double tol = 0.0;
  // If set, receives w^H H w after every round.
  std::vector<double>* rayleigh_history = nullptr;
};

inline constexpr std::size_t kDefaultPowerIterations = 150;

inline CorrelationMatrix build_correlation(std::span<const double> y, const CMatrix& rows,
                                           CorrelationSide side = CorrelationSide::g_side) {
  if (y.size() != rows.rows()) {
    throw DimensionError("build_correlation: y has length " + std::to_string(y.size()) +
                         " but the map has " + std::to_string(rows.rows()) + " rows");
  }
  const std::size_t d = rows.cols();
  CMatrix H(d, d);
  for (std::size_t l = 0; l < rows.rows(); ++l) {
    const auto row = rows.row(l);
    const double w = y[l];
    // (a a^H)[p, q] = a[p] conj(a[q]) = conj(row[p]) row[q]; upper triangle only.
    for (std::size_t p = 0; p < d; ++p) {
      const Complex left = w * std::conj(row[p]);
      for (std::size_t q = p; q < d; ++q) H(p, q) += left * row[q];
    }
  }
  const double inv_m = 1.0 / static_cast<double>(rows.rows());
  for (std::size_t p = 0; p < d; ++p) {
    H(p, p) = {H(p, p).real() * inv_m, 0.0};
    for (std::size_t q = p + 1; q < d; ++q) {
      H(p, q) *= inv_m;
      H(q, p) = std::conj(H(p, q));
    }
  }
  return {std::move(H), side};
}

inline double rayleigh_quotient(const CMatrix& H, std::span<const Complex> w) {
  return hermitian_inner(w, matvec(H, w)).real();
}

/// Leading eigenpair by repeated multiply-and-normalize from a CN(0, I) start.
inline EigenEstimate power_iteration(const CorrelationMatrix& corr, std::size_t iters,
                                     SeededRng& rng, const PowerIterationOptions& opts = {}) {
  const CMatrix& H = corr.H;
  const std::size_t d = corr.dim();
  if (d == 0) throw DimensionError("power_iteration: empty matrix");
  if (iters == 0) throw ConfigError("power_iteration: iters must be >= 1");
  double scale = 0.0;
  for (const auto& c : H.data()) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw DegenerateSpectrumError("power_iteration: zero matrix");

  CVector w = sample_complex_gaussian(rng, d);
  {
    const double nw = norm(w);
    for (auto& c : w) c /= nw;
  }
  EigenEstimate est;
  for (std::size_t it = 0; it < iters; ++it) {
    CVector next = matvec(H, w);
    const double nn = norm(next);
    if (nn == 0.0 || !std::isfinite(nn)) {
      throw DegenerateSpectrumError("power_iteration: iterate collapsed at round " +
                                    std::to_string(it + 1));
    }
    for (auto& c : next) c /= nn;
    est.iterations_used = it + 1;
    double change = 0.0;
    if (opts.tol > 0.0) {
      // phase-invariant: the iterate may pick up a global phase each round
      const double overlap = std::abs(hermitian_inner(w, next));
      change = std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
    }
    w = std::move(next);
    if (opts.rayleigh_history) opts.rayleigh_history->push_back(rayleigh_quotient(H, w));
    if (opts.tol > 0.0 && change < opts.tol) break;
  }
  est.eigenvalue = rayleigh_quotient(H, w);
  est.eigenvector = std::move(w);
  return est;
}

struct SpectralInit {
  CVector g0;
  CVector z0;
  double lambda_g = 0.0;
  double lambda_z = 0.0;
};

/// g0 = leading eigenvector of H_g; z0 = sqrt(lambda_z / 2) times the leading
/// eigenvector of H_z. A negative lambda_z (possible with noisy y) gives z0 = 0.
inline SpectralInit initialize(std::span<const double> y, const CMatrix& Bhat,
                               const CMatrix& Chat, std::size_t iters, SeededRng& rng) {
  if (Bhat.rows() != Chat.rows()) throw DimensionError("initialize: Bhat/Chat row mismatch");
  bool any = false;
  for (double v : y) any = any || v != 0.0;
  if (!any) throw DegenerateSpectrumError("initialize: all-zero measurements");

  const EigenEstimate eg =
      power_iteration(build_correlation(y, Bhat, CorrelationSide::g_side), iters, rng);
  const EigenEstimate ez =
      power_iteration(build_correlation(y, Chat, CorrelationSide::z_side), iters, rng);
  SpectralInit out;
  out.lambda_g = eg.eigenvalue;
  out.lambda_z = ez.eigenvalue;
  out.g0 = eg.eigenvector;
  out.z0 = scaled(ez.eigenvector, std::sqrt(std::max(ez.eigenvalue, 0.0) / 2.0));
  return out;
}

/// Baseline start: random unit g and a random direction for z carrying the
/// spectral energy sqrt(lambda_z / 2), so the two starts differ only in
/// direction.
inline SpectralInit random_initialize(const SpectralInit& spectral, SeededRng& rng) {
  SpectralInit out;
  out.lambda_g = spectral.lambda_g;
  out.lambda_z = spectral.lambda_z;
  out.g0 = sample_complex_gaussian(rng, spectral.g0.size());
  out.g0 = scaled(out.g0, 1.0 / norm(out.g0));
  CVector dir = sample_complex_gaussian(rng, spectral.z0.size());
  out.z0 = scaled(dir, std::sqrt(std::max(spectral.lambda_z, 0.0) / 2.0) / norm(dir));
  return out;
}

}  // namespace bliphasu
