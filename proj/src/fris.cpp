#include "vifuse/fris.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "vifuse/spatial_ops.hpp"

namespace vifuse {

Image max_image(const Image& ir, const Image& vi) {
  require_same_shape(ir, vi, "max_image");
  Image out(ir.width(), ir.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(ir[i], vi[i]);
  return out;
}

ReferenceBundle synthesize_reference(const Image& ir, const Image& vi, double alpha, int edge_sign) {
  require_same_shape(ir, vi, "synthesize_reference");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1], got " + std::to_string(alpha));
  }
  if (edge_sign != 1 && edge_sign != -1) {
    throw std::invalid_argument("edge_sign must be +1 or -1, got " + std::to_string(edge_sign));
  }

  // The sum is deliberately left unclamped; only the final plane is
  // truncated.
  Image sum(ir.width(), ir.height());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ir[i] + vi[i];

  ReferenceBundle bundle;
  bundle.alpha = alpha;
  bundle.i_edge = laplacian(sum);
  if (edge_sign < 0) {
    for (double& v : bundle.i_edge.pixels()) v = -v;
  }
  bundle.i_max = max_image(ir, vi);

  Image enhanced(ir.width(), ir.height());
  for (std::size_t i = 0; i < enhanced.size(); ++i) {
    enhanced[i] = bundle.i_edge[i] + bundle.i_max[i];
  }
  bundle.i_en = clamp01(enhanced);
  bundle.i_eq = hist_equalize(bundle.i_en);

  bundle.i_ref = Image(ir.width(), ir.height());
  for (std::size_t i = 0; i < bundle.i_ref.size(); ++i) {
    bundle.i_ref[i] = alpha * bundle.i_en[i] + (1.0 - alpha) * bundle.i_eq[i];
  }
  return bundle;
}

}  // namespace vifuse
