#pragma once

#include "vifuse/image.hpp"

namespace vifuse {

// Horizontal/vertical Sobel derivative planes.
struct GradientField {
  Image gx;
  Image gy;
};

// Unnormalized 3x3 Sobel with replicate padding, applied as correlation:
//   gx = img (*) [[-1,0,1],[-2,0,2],[-1,0,1]],  gy = img (*) transpose.
// On a horizontal ramp of slope d the interior response is gx = 8d.
GradientField sobel(const Image& img);

// Exact transpose of the linear map `sobel` (padding included), so that
// <sobel(x), u> = <x, sobel_adjoint(u)>.
Image sobel_adjoint(const GradientField& field);

// Per-pixel sqrt(gx^2 + gy^2).
Image magnitude(const GradientField& field);

// 4-neighbour Laplacian [[0,1,0],[1,-4,1],[0,1,0]], replicate padding,
// signed output.
Image laplacian(const Image& img);

// Global histogram equalization over 256 levels. Level v maps to
// (C(v) - Cmin) / (N - Cmin) with C the cumulative count and Cmin the count
// of the lowest occupied level. A single occupied level gives 0/0, which is
// defined as 1.0.
Image hist_equalize(const Image& img);

// Quantization to the 8-bit code used by histogram based operations.
int to_level(double v);

}  // namespace vifuse
