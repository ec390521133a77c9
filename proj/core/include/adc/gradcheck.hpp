#pragma once

#include <cstdint>
#include <string>

#include "adc/model.hpp"

namespace adc {

struct GradCheckReport {
  int n_checked = 0;
  double max_rel_err = 0.0;
  std::string worst_tensor;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed(double tol = 1e-4) const { return n_checked > 0 && max_rel_err < tol; }
};

// Compares analytic gradients of a cross-entropy loss on one random input
// (T = 20 frames) against central finite differences over `n_samples`
// randomly sampled parameters. Relative error uses |a - n| / max(|a| + |n|,
// 1e-6). `corrupt_backward` flips the sign of every analytic gradient — a
// harness self-test that must report errors far above any passing tolerance.
GradCheckReport grad_check(const ModelConfig& cfg, uint64_t seed, int n_samples = 200,
                           double epsilon = 1e-5, bool corrupt_backward = false);

}  // namespace adc
