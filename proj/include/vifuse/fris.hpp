#pragma once

#include "vifuse/image.hpp"

namespace vifuse {

constexpr double kDefaultAlpha = 0.75;

// Intermediate planes of the fine-grained reference synthesis.
struct ReferenceBundle {
  Image i_edge;  // signed; edge_sign * laplacian(ir + vi)
  Image i_max;
  Image i_en;  // clamp01(i_edge + i_max)
  Image i_eq;  // hist_equalize(i_en)
  Image i_ref;  // alpha * i_en + (1 - alpha) * i_eq
  double alpha = kDefaultAlpha;
};

Image max_image(const Image& ir, const Image& vi);

// edge_sign selects between injecting +laplacian (default) and the
// classical sharpening sign -laplacian.
ReferenceBundle synthesize_reference(const Image& ir, const Image& vi,
                                     double alpha = kDefaultAlpha, int edge_sign = 1);

}  // namespace vifuse
