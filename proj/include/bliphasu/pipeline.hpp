#pragma once

#include <optional>

#include "bliphasu/model.hpp"
#include "bliphasu/refine.hpp"
#include "bliphasu/spectral_init.hpp"

namespace bliphasu {

enum class InitMode { spectral, random };

inline std::string_view to_string(InitMode mode) {
  return mode == InitMode::spectral ? "spectral" : "random";
}

inline InitMode parse_init_mode(std::string_view text) {
  if (text == "spectral") return InitMode::spectral;
  if (text == "random") return InitMode::random;
  throw ConfigError("unknown init mode '" + std::string(text) + "'");
}

struct RecoveryResult {
  // Scale-aligned estimates (||g_hat|| = 1).
  CVector g_hat;
  CVector z_hat;
  // Full-resolution kernel B g_hat and signal C z_hat, when B and C are known.
  std::optional<CVector> h_hat;
  std::optional<CVector> x_hat;
  SpectralInit init;
  StepSizes steps{};
  RefineResult refine;
};

/// Measurements rescaled to the Hadamard form |Bhat g . Chat z|^2.
inline RVector effective_measurements(std::span<const double> y, const ProblemInstance& inst) {
  if (y.size() != inst.m) throw DimensionError("y length does not match m");
  RVector out(y.begin(), y.end());
  // convolutional data carry an extra factor n, see intensity_scale()
  if (const double scale = inst.intensity_scale(); scale != 1.0) {
    for (auto& v : out) v /= scale;
  }
  return out;
}

struct StartPoint {
  SpectralInit spectral;
  SpectralInit start;  // equals `spectral` for InitMode::spectral
};

inline StartPoint compute_start(std::span<const double> y_eff, const ProblemInstance& inst,
                                std::size_t init_iters, std::uint64_t seed, InitMode mode) {
  SeededRng init_rng(seed, stream_id({0x696E6974ULL /* "init" */}));
  StartPoint out;
  out.spectral = initialize(y_eff, inst.Bhat, inst.Chat, init_iters, init_rng);
  if (mode == InitMode::spectral) {
    out.start = out.spectral;
  } else {
    SeededRng start_rng(seed, stream_id({0x72616E64ULL /* "rand" */}));
    out.start = random_initialize(out.spectral, start_rng);
  }
  return out;
}

/// Spectral (or random) start followed by stochastic refinement. All
/// randomness derives from config.seed.
inline RecoveryResult recover(std::span<const double> y, const ProblemInstance& inst,
                               std::size_t init_iters, const RefineConfig& config,
                               InitMode init_mode = InitMode::spectral) {
  const RVector y_eff = effective_measurements(y, inst);
  const StartPoint sp = compute_start(y_eff, inst, init_iters, config.seed, init_mode);
  RecoveryResult out;
  out.init = sp.start;

  // Both start modes share steps measured at the spectral estimate, so they
  // differ only in the starting direction.
  RefineConfig resolved = config;
  out.steps = resolve_step_sizes(config, sp.spectral.g0, sp.spectral.z0, inst.Bhat, inst.Chat);
  resolved.alpha_g = out.steps.alpha_g;
  resolved.alpha_z = out.steps.alpha_z;

  std::optional<GroundTruth> truth;
  if (inst.g_true && inst.z_true) truth = GroundTruth{*inst.g_true, *inst.z_true};
  out.refine =
      run_refinement(out.init.g0, out.init.z0, y_eff, inst.Bhat, inst.Chat, resolved, truth);

  AlignedPair aligned = align_scale(out.refine.g, out.refine.z);
  out.g_hat = std::move(aligned.g);
  out.z_hat = std::move(aligned.z);
  if (inst.has_full_resolution()) {
    out.h_hat = matvec(*inst.B, out.g_hat);
    out.x_hat = matvec(*inst.C, out.z_hat);
  }
  return out;
}

}  // namespace bliphasu
