#include "vifuse/angular_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vifuse {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double rms(const Image& a, const Image& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

double mae(const Image& a, const Image& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

// grad += scale * d RMS(a - b) / d a. Zero when the RMS vanishes.
void add_rms_grad(const Image& a, const Image& b, double value, double scale, Image& grad) {
  if (value <= 0.0 || scale == 0.0) return;
  const double k = scale / (static_cast<double>(a.size()) * value);
  for (std::size_t i = 0; i < a.size(); ++i) grad[i] += k * (a[i] - b[i]);
}

// Pulls a per-pixel derivative with respect to gradient magnitude back onto
// the gradient components: d|g|/dg = g/|g| (0 at g = 0).
void add_magnitude_pullback(const GradientField& g, const Image& mag, std::size_t i, double dmag,
                            GradientField& u) {
  if (dmag == 0.0 || mag[i] <= 0.0) return;
  u.gx[i] += dmag * g.gx[i] / mag[i];
  u.gy[i] += dmag * g.gy[i] / mag[i];
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("loss weights lambda1/lambda2 must be non-negative");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  if (edge_sign != 1 && edge_sign != -1) throw std::invalid_argument("edge_sign must be +1 or -1");
}

bool LossBreakdown::finite() const {
  return std::isfinite(l_int) && std::isfinite(l_mag) && std::isfinite(l_angle) &&
         std::isfinite(l_grad) && std::isfinite(l_total);
}

ReferenceGradient reference_gradient(const Image& ir, const Image& vi) {
  require_same_shape(ir, vi, "reference_gradient");
  const GradientField g_ir = sobel(ir);
  const GradientField g_vi = sobel(vi);
  const Image mag_ir = magnitude(g_ir);
  const Image mag_vi = magnitude(g_vi);

  ReferenceGradient ref{g_vi, Image(ir.width(), ir.height()),
                        std::vector<Source>(ir.size(), Source::kVi)};
  for (std::size_t i = 0; i < ir.size(); ++i) {
    if (mag_ir[i] > mag_vi[i]) {
      ref.field.gx[i] = g_ir.gx[i];
      ref.field.gy[i] = g_ir.gy[i];
      ref.winner[i] = Source::kIr;
    }
  }
  ref.mag = magnitude(ref.field);
  return ref;
}

double loss_int(const Image& fused, const ReferenceBundle& bundle) {
  require_same_shape(fused, bundle.i_ref, "loss_int");
  return mae(fused, bundle.i_ref);
}

double loss_mag(const Image& fused, const ReferenceGradient& ref) {
  require_same_shape(fused, ref.mag, "loss_mag");
  return rms(magnitude(sobel(fused)), ref.mag);
}

double loss_angle(const Image& fused, const ReferenceGradient& ref, double eps) {
  require_same_shape(fused, ref.mag, "loss_angle");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const GradientField g = sobel(fused);
  const Image mag = magnitude(g);
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (ref.mag[i] < eps && mag[i] < eps) {
      cs_sum += 1.0;
      continue;
    }
    const double dot = ref.field.gx[i] * g.gx[i] + ref.field.gy[i] * g.gy[i];
    cs_sum += dot / (ref.mag[i] * mag[i] + eps);
  }
  return 1.0 - cs_sum / static_cast<double>(fused.size());
}

GradientLoss loss_grad(const Image& fused, const ReferenceGradient& ref, const LossWeights& w) {
  w.validate();
  GradientLoss out;
  out.l_mag = loss_mag(fused, ref);
  out.l_angle = loss_angle(fused, ref, w.eps);
  out.l_grad = w.lambda1 * out.l_mag + w.lambda2 * out.l_angle;
  return out;
}

LossBreakdown loss_total(const Image& fused, const Image& ir, const Image& vi,
                         const LossWeights& w) {
  return AngularObjective(ir, vi, w).evaluate(fused, nullptr);
}

Image loss_total_grad(const Image& fused, const Image& ir, const Image& vi, const LossWeights& w) {
  Image grad;
  AngularObjective(ir, vi, w).evaluate(fused, &grad);
  return grad;
}

AngularObjective::AngularObjective(const Image& ir, const Image& vi, const LossWeights& w)
    : weights_(w) {
  weights_.validate();
  require_same_shape(ir, vi, "AngularObjective");
  bundle_ = synthesize_reference(ir, vi, w.alpha, w.edge_sign);
  reference_ = reference_gradient(ir, vi);
}

LossBreakdown AngularObjective::evaluate(const Image& fused, Image* grad) const {
  require_same_shape(fused, bundle_.i_ref, "loss_total");
  const std::size_t n = fused.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = weights_.eps;
  const GradientField g = sobel(fused);
  const Image mag = magnitude(g);
  const GradientField& r = reference_.field;
  const Image& rmag = reference_.mag;

  LossBreakdown out;
  out.l_int = mae(fused, bundle_.i_ref);
  out.l_mag = rms(mag, rmag);

  double cs_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rmag[i] < eps && mag[i] < eps) {
      cs_sum += 1.0;
    } else {
      cs_sum += (r.gx[i] * g.gx[i] + r.gy[i] * g.gy[i]) / (rmag[i] * mag[i] + eps);
    }
  }
  out.l_angle = 1.0 - cs_sum * inv_n;
  out.l_grad = weights_.lambda1 * out.l_mag + weights_.lambda2 * out.l_angle;
  out.l_total = out.l_int + out.l_grad;

  if (grad == nullptr) return out;

  GradientField u{Image(fused.width(), fused.height()), Image(fused.width(), fused.height())};
  const double mag_scale =
      out.l_mag > 0.0 ? weights_.lambda1 * inv_n / out.l_mag : 0.0;
  const double angle_scale = -weights_.lambda2 * inv_n;
  for (std::size_t i = 0; i < n; ++i) {
    add_magnitude_pullback(g, mag, i, mag_scale * (mag[i] - rmag[i]), u);

    if (angle_scale == 0.0 || (rmag[i] < eps && mag[i] < eps)) continue;
    // cs = <r, f> / D with D = |r||f| + eps:
    //   dcs/df = r / D - <r, f> |r| f / (|f| D^2)
    const double denom = rmag[i] * mag[i] + eps;
    u.gx[i] += angle_scale * r.gx[i] / denom;
    u.gy[i] += angle_scale * r.gy[i] / denom;
    if (mag[i] > 0.0) {
      const double dot = r.gx[i] * g.gx[i] + r.gy[i] * g.gy[i];
      add_magnitude_pullback(g, mag, i, -angle_scale * dot * rmag[i] / (denom * denom), u);
    }
  }

  *grad = sobel_adjoint(u);
  for (std::size_t i = 0; i < n; ++i) (*grad)[i] += sign(fused[i] - bundle_.i_ref[i]) * inv_n;
  return out;
}

BaselineKind parse_baseline_kind(const std::string& name) {
  if (name == "linear") return BaselineKind::kLinear;
  if (name == "modal_prior") return BaselineKind::kModalPrior;
  if (name == "multi_modal") return BaselineKind::kMultiModal;
  if (name == "max_preserve") return BaselineKind::kMaxPreserve;
  throw std::invalid_argument("unknown baseline loss '" + name + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kLinear:
      return "linear";
    case BaselineKind::kModalPrior:
      return "modal_prior";
    case BaselineKind::kMultiModal:
      return "multi_modal";
    case BaselineKind::kMaxPreserve:
      return "max_preserve";
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineObjective::BaselineObjective(BaselineKind kind, const Image& ir, const Image& vi,
                                     const BaselineWeights& w)
    : kind_(kind), weights_(w), ir_(ir), vi_(vi) {
  require_same_shape(ir, vi, "BaselineObjective");
  mag_ir_ = magnitude(sobel(ir));
  mag_vi_ = magnitude(sobel(vi));
  mag_max_ = max_image(mag_ir_, mag_vi_);
  target_ = Image(ir.width(), ir.height());
  switch (kind) {
    case BaselineKind::kLinear:
      for (std::size_t i = 0; i < target_.size(); ++i) target_[i] = w.w1 * ir[i] + w.w2 * vi[i];
      break;
    case BaselineKind::kModalPrior:
      target_ = ir;
      break;
    case BaselineKind::kMultiModal: {
      const double total = w.beta[0] + w.beta[1];
      const double a = total > 0.0 ? w.beta[0] / total : 0.5;
      for (std::size_t i = 0; i < target_.size(); ++i) target_[i] = a * ir[i] + (1.0 - a) * vi[i];
      break;
    }
    case BaselineKind::kMaxPreserve:
      target_ = max_image(ir, vi);
      break;
  }
}

LossBreakdown BaselineObjective::evaluate(const Image& fused, Image* grad) const {
  require_same_shape(fused, ir_, "baseline_loss");
  const std::size_t n = fused.size();
  const GradientField g = sobel(fused);
  const Image mag = magnitude(g);

  double intensity = 0.0;
  double gradient = 0.0;
  Image dpix(fused.width(), fused.height());
  // d loss / d |grad f| per pixel, pulled back through sobel below.
  Image dmag(fused.width(), fused.height());

  switch (kind_) {
    case BaselineKind::kLinear: {
      intensity = rms(fused, target_);
      add_rms_grad(fused, target_, intensity, 1.0, dpix);
      break;
    }
    case BaselineKind::kModalPrior: {
      intensity = rms(fused, ir_);
      add_rms_grad(fused, ir_, intensity, 1.0, dpix);
      const double gv = rms(mag, mag_vi_);
      gradient = weights_.xi * gv;
      add_rms_grad(mag, mag_vi_, gv, weights_.xi, dmag);
      break;
    }
    case BaselineKind::kMultiModal: {
      const auto& b = weights_.beta;
      const double i1 = rms(fused, ir_);
      const double i2 = rms(fused, vi_);
      const double g1 = rms(mag, mag_ir_);
      const double g2 = rms(mag, mag_vi_);
      intensity = b[0] * i1 + b[1] * i2;
      gradient = b[2] * g1 + b[3] * g2;
      add_rms_grad(fused, ir_, i1, b[0], dpix);
      add_rms_grad(fused, vi_, i2, b[1], dpix);
      add_rms_grad(mag, mag_ir_, g1, b[2], dmag);
      add_rms_grad(mag, mag_vi_, g2, b[3], dmag);
      break;
    }
    case BaselineKind::kMaxPreserve: {
      intensity = mae(fused, target_);
      const double gm = mae(mag, mag_max_);
      gradient = weights_.gamma * gm;
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        dpix[i] = sign(fused[i] - target_[i]) * inv_n;
        dmag[i] = weights_.gamma * sign(mag[i] - mag_max_[i]) * inv_n;
      }
      break;
    }
  }

  LossBreakdown out;
  out.l_int = intensity;
  out.l_mag = gradient;
  out.l_angle = 0.0;
  out.l_grad = gradient;
  out.l_total = intensity + gradient;

  if (grad != nullptr) {
    GradientField u{Image(fused.width(), fused.height()), Image(fused.width(), fused.height())};
    for (std::size_t i = 0; i < n; ++i) add_magnitude_pullback(g, mag, i, dmag[i], u);
    *grad = sobel_adjoint(u);
    for (std::size_t i = 0; i < n; ++i) (*grad)[i] += dpix[i];
  }
  return out;
}

double baseline_loss(BaselineKind kind, const Image& fused, const Image& ir, const Image& vi,
                     const BaselineWeights& w) {
  return BaselineObjective(kind, ir, vi, w).evaluate(fused, nullptr).l_total;
}

nlohmann::json to_json(const LossBreakdown& b, const LossWeights& w) {
  return nlohmann::json{{"l_int", b.l_int},       {"l_mag", b.l_mag},
                        {"l_angle", b.l_angle},   {"l_grad", b.l_grad},
                        {"l_total", b.l_total},   {"lambda1", w.lambda1},
                        {"lambda2", w.lambda2},   {"alpha", w.alpha},
                        {"eps", w.eps},           {"edge_sign", w.edge_sign}};
}

}  // namespace vifuse
