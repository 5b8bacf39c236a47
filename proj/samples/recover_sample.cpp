// Recover a kernel and signal from low-resolution intensities of their
// circular convolution, then compare against the ground truth.
#include <cstdio>

#include "bliphasu.hpp"

int main() {
  using namespace bliphasu;
  const std::size_t n = 128, k = 4, s = 4, m = 96;

  SeededRng rng(4);
  const ProblemInstance inst = synthesize_instance(n, k, s, m, SynthesisMode::convolutional, rng);
  SeededRng noise(7, 1);
  const MeasurementSet meas = simulate_measurements(inst, std::nullopt, noise);

  RefineConfig cfg;
  cfg.full_batch = true;
  cfg.tol = 1e-12;
  cfg.max_iters = 2000;
  cfg.seed = 7;
  const RecoveryResult res = recover(meas.y, inst, kDefaultPowerIterations, cfg);

  const CVector h_true = matvec(*inst.B, *inst.g_true);
  const CVector x_true = matvec(*inst.C, *inst.z_true);
  std::printf("iterations      %zu (%s)\n", res.refine.iterations,
              std::string(to_string(res.refine.stop_reason)).c_str());
  std::printf("init pair error %.3e\n", pair_error(res.init.g0, res.init.z0, *inst.g_true, *inst.z_true));
  std::printf("pair error      %.3e\n", pair_error(res.g_hat, res.z_hat, *inst.g_true, *inst.z_true));
  std::printf("kernel error    %.3e\n", relative_error(*res.h_hat, h_true));
  std::printf("signal error    %.3e\n", relative_error(*res.x_hat, x_true));
}
