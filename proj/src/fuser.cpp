#include "vifuse/fuser.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "vifuse/errors.hpp"

namespace vifuse {

InitMode parse_init_mode(const std::string& name) {
  if (name == "reference") return InitMode::kReference;
  if (name == "max") return InitMode::kMax;
  if (name == "average") return InitMode::kAverage;
  throw std::invalid_argument("unknown init mode '" + name + "' (reference|max|average)");
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::kReference:
      return "reference";
    case InitMode::kMax:
      return "max";
    case InitMode::kAverage:
      return "average";
  }
  return "reference";
}

std::string to_string(Termination t) { return t == Termination::kTol ? "tol" : "max_iters"; }

void FuserConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0,1)");
  }
  weights.validate();
}

void FuseTrace::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "iteration,l_int,l_mag,l_angle,l_grad,l_total\n";
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const LossBreakdown& b = iterations[i];
    out << (i + 1) << ',' << b.l_int << ',' << b.l_mag << ',' << b.l_angle << ',' << b.l_grad
        << ',' << b.l_total << '\n';
  }
  out.precision(old_precision);
}

namespace {

Image initial_plane(const Objective& objective, const Image& ir, const Image& vi, InitMode mode) {
  switch (mode) {
    case InitMode::kReference:
      return objective.intensity_target();
    case InitMode::kMax: {
      Image out(ir.width(), ir.height());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(ir[i], vi[i]);
      return out;
    }
    case InitMode::kAverage: {
      Image out(ir.width(), ir.height());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (ir[i] + vi[i]);
      return out;
    }
  }
  return objective.intensity_target();
}

void require_finite(const LossBreakdown& b, int iteration) {
  if (!b.finite()) {
    throw NumericError("non-finite loss at iteration " + std::to_string(iteration));
  }
}

void require_finite_input(const Image& img, const char* what) {
  for (double v : img.pixels()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite sample in ") + what + " input");
  }
}

}  // namespace

FuseResult minimize(const Objective& objective, const Image& ir, const Image& vi,
                    const FuserConfig& cfg) {
  cfg.validate();
  require_same_shape(ir, vi, "fuse");

  FuseResult result;
  Image x = initial_plane(objective, ir, vi, cfg.init);
  if (cfg.project_each_step) x = clamp01(x);

  Image grad;
  LossBreakdown current = objective.evaluate(x, &grad);
  require_finite(current, 0);
  result.trace.initial = current;

  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  std::vector<double> v(n, 0.0);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  constexpr double kAdamEps = 1e-8;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    if (std::all_of(grad.pixels().begin(), grad.pixels().end(),
                    [](double g) { return g == 0.0; })) {
      result.trace.iterations.push_back(current);
      result.trace.terminated_by = Termination::kTol;
      break;
    }

    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    const double step = cfg.step_size;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = grad[i];
      if (!std::isfinite(g)) throw NumericError("non-finite gradient at iteration " + std::to_string(t));
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / (1.0 - beta1_pow);
      const double v_hat = v[i] / (1.0 - beta2_pow);
      x[i] -= step * m_hat / (std::sqrt(v_hat) + kAdamEps);
      if (cfg.project_each_step) x[i] = std::clamp(x[i], 0.0, 1.0);
    }

    const LossBreakdown next = objective.evaluate(x, &grad);
    require_finite(next, t);
    result.trace.iterations.push_back(next);

    const double rel =
        std::abs(next.l_total - current.l_total) / std::max(current.l_total, 1e-12);
    current = next;
    if (rel < cfg.rel_tol) {
      result.trace.terminated_by = Termination::kTol;
      break;
    }
  }

  result.trace.iterations_run = static_cast<int>(result.trace.iterations.size());
  result.fused = clamp01(x);
  return result;
}

FuseResult fuse(const Image& ir, const Image& vi, const FuserConfig& cfg) {
  cfg.validate();
  require_same_shape(ir, vi, "fuse");
  require_finite_input(ir, "infrared");
  require_finite_input(vi, "visible");
  const AngularObjective objective(ir, vi, cfg.weights);
  return minimize(objective, ir, vi, cfg);
}

FuseResult fuse_masked(const Image& ir, const Image& vi, const MaskPair& masks,
                       const FuserConfig& cfg) {
  auto [ir_masked, vi_masked] = apply_masks(ir, vi, masks);
  return fuse(ir_masked, vi_masked, cfg);
}

}  // namespace vifuse
