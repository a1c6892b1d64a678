#pragma once

#include <functional>
#include <string>
#include <vector>

#include "botdgt/autodiff.hpp"

namespace botdgt::ad {

struct GradCheckEntry {
  std::string tensor;
  double max_rel_error = 0.0;
  std::int64_t coords_checked = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool pass = true;
};

// Central-difference check of analytic gradients already stored in
// params[i]->grad. `f` rebuilds the forward pass from current parameter
// values and returns the scalar loss. Tensors larger than max_coords get a
// seeded coordinate sample (at least 64 per tensor).
//
// Relative error per coordinate: |fd - grad| / max(|fd| + |grad|, 1e-4); the
// floor keeps finite-difference noise on near-zero gradients from registering
// as failures.
GradCheckReport finite_difference_check(const std::function<double()>& f,
                                        const std::vector<TensorPtr>& params,
                                        double h = 1e-5, double tol = 1e-4,
                                        std::int64_t max_coords = 64,
                                        std::uint64_t sample_seed = 0);

}  // namespace botdgt::ad
