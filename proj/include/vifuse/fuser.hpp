#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vifuse/angular_loss.hpp"
#include "vifuse/commask.hpp"
#include "vifuse/image.hpp"

namespace vifuse {

enum class InitMode { kReference, kMax, kAverage };

InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode mode);

struct FuserConfig {
  InitMode init = InitMode::kReference;
  double step_size = 1e-2;
  int max_iters = 300;
  double rel_tol = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  LossWeights weights;
  bool project_each_step = true;

  void validate() const;
};

enum class Termination { kTol, kMaxIters };

std::string to_string(Termination t);

struct FuseTrace {
  LossBreakdown initial;  // loss at the initialization, before any step
  std::vector<LossBreakdown> iterations;
  int iterations_run = 0;
  Termination terminated_by = Termination::kMaxIters;

  // CSV with header iteration,l_int,l_mag,l_angle,l_grad,l_total.
  void write_csv(std::ostream& out) const;
};

struct FuseResult {
  Image fused;
  FuseTrace trace;
};

// Adam on the fused pixel plane. Each iteration takes one step, optionally
// projects onto [0,1] and records the loss at the new point. Iteration
// stops once the relative change of l_total drops below rel_tol, or
// immediately when the gradient vanishes identically (the initialization
// is stationary; that iteration records the unchanged loss). Throws
// NumericError on a non-finite loss or gradient.
FuseResult minimize(const Objective& objective, const Image& ir, const Image& vi,
                    const FuserConfig& cfg);

// minimize() with the angular objective built from (ir, vi, cfg.weights).
FuseResult fuse(const Image& ir, const Image& vi, const FuserConfig& cfg = {});

// Applies the complementary masks to the inputs, then fuses the masked
// pair.
FuseResult fuse_masked(const Image& ir, const Image& vi, const MaskPair& masks,
                       const FuserConfig& cfg = {});

}  // namespace vifuse
