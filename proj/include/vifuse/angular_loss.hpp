#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vifuse/fris.hpp"
#include "vifuse/image.hpp"
#include "vifuse/spatial_ops.hpp"

namespace vifuse {

struct LossWeights {
  double lambda1 = 5.0;  // gradient magnitude
  double lambda2 = 1.0;  // gradient direction
  double alpha = kDefaultAlpha;
  double eps = 1e-8;
  int edge_sign = 1;

  // Throws std::invalid_argument on negative lambdas, eps <= 0, alpha
  // outside [0,1] or edge_sign not in {-1, +1}.
  void validate() const;
};

struct LossBreakdown {
  double l_int = 0.0;
  double l_mag = 0.0;
  double l_angle = 0.0;
  double l_grad = 0.0;
  double l_total = 0.0;

  bool finite() const;
};

enum class Source : std::uint8_t { kIr, kVi };

// Max-magnitude selection of the two source gradient fields; ties go to
// the visible image.
struct ReferenceGradient {
  GradientField field;
  Image mag;
  std::vector<Source> winner;
};

ReferenceGradient reference_gradient(const Image& ir, const Image& vi);

// Mean absolute error against bundle.i_ref.
double loss_int(const Image& fused, const ReferenceBundle& bundle);

// RMS of the per-pixel gap between fused and reference gradient magnitudes.
double loss_mag(const Image& fused, const ReferenceGradient& ref);

// 1 - mean per-pixel cosine similarity between the fused and reference
// gradient vectors. The cosine denominator carries +eps, and pixels where
// both vectors are shorter than eps count as perfectly aligned.
double loss_angle(const Image& fused, const ReferenceGradient& ref, double eps);

struct GradientLoss {
  double l_mag = 0.0;
  double l_angle = 0.0;
  double l_grad = 0.0;
};

GradientLoss loss_grad(const Image& fused, const ReferenceGradient& ref, const LossWeights& w);

LossBreakdown loss_total(const Image& fused, const Image& ir, const Image& vi,
                         const LossWeights& w = {});

// d loss_total / d fused. The reference bundle and reference gradient are
// constants with respect to the fused image. At exact L1 ties the
// subgradient 0 is used.
Image loss_total_grad(const Image& fused, const Image& ir, const Image& vi,
                      const LossWeights& w = {});

// A differentiable objective over the fused pixel plane, as consumed by
// the optimizer. Implementations precompute everything that does not
// depend on the fused image.
class Objective {
 public:
  virtual ~Objective() = default;

  // Loss at `fused`; when `grad` is non-null it receives the gradient.
  virtual LossBreakdown evaluate(const Image& fused, Image* grad) const = 0;

  // Minimizer of the objective's intensity term, used as the "reference"
  // initialization.
  virtual const Image& intensity_target() const = 0;

  virtual std::string name() const = 0;
};

// The composite intensity + angle-aware gradient objective.
class AngularObjective final : public Objective {
 public:
  AngularObjective(const Image& ir, const Image& vi, const LossWeights& w = {});

  LossBreakdown evaluate(const Image& fused, Image* grad) const override;
  const Image& intensity_target() const override { return bundle_.i_ref; }
  std::string name() const override { return "angular"; }

  const ReferenceBundle& bundle() const { return bundle_; }
  const ReferenceGradient& reference() const { return reference_; }
  const LossWeights& weights() const { return weights_; }

 private:
  LossWeights weights_;
  ReferenceBundle bundle_;
  ReferenceGradient reference_;
};

enum class BaselineKind { kLinear, kModalPrior, kMultiModal, kMaxPreserve };

BaselineKind parse_baseline_kind(const std::string& name);
std::string to_string(BaselineKind kind);

// Per-kind weights. L2 norms are evaluated as RMS, L1 norms as MAE and
// gradients as Sobel magnitudes.
struct BaselineWeights {
  double w1 = 0.5;  // linear: infrared weight
  double w2 = 0.5;  // linear: visible weight
  double xi = 1.0;  // modal_prior: gradient term weight
  std::array<double, 4> beta{1.0, 1.0, 1.0, 1.0};  // multi_modal
  double gamma = 1.0;  // max_preserve: gradient term weight
};

// The four intensity/gradient losses commonly used before the angle-aware
// objective:
//   linear       RMS(f - (w1 ir + w2 vi))
//   modal_prior  RMS(f - ir) + xi RMS(|grad f| - |grad vi|)
//   multi_modal  b1 RMS(f - ir) + b2 RMS(f - vi)
//                + b3 RMS(|grad f| - |grad ir|) + b4 RMS(|grad f| - |grad vi|)
//   max_preserve MAE(f - max(ir, vi)) + gamma MAE(|grad f| - max(|grad ir|, |grad vi|))
// The breakdown reports the intensity part as l_int, the gradient part as
// l_mag and l_grad, and l_angle = 0.
class BaselineObjective final : public Objective {
 public:
  BaselineObjective(BaselineKind kind, const Image& ir, const Image& vi,
                    const BaselineWeights& w = {});

  LossBreakdown evaluate(const Image& fused, Image* grad) const override;
  const Image& intensity_target() const override { return target_; }
  std::string name() const override { return to_string(kind_); }

 private:
  BaselineKind kind_;
  BaselineWeights weights_;
  Image ir_;
  Image vi_;
  Image mag_ir_;
  Image mag_vi_;
  Image mag_max_;
  Image target_;
};

double baseline_loss(BaselineKind kind, const Image& fused, const Image& ir, const Image& vi,
                     const BaselineWeights& w = {});

nlohmann::json to_json(const LossBreakdown& b, const LossWeights& w);

}  // namespace vifuse
