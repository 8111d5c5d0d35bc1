#include "vifuse/spatial_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace vifuse {

namespace {

// Correlation taps, indexed [dr + 1][dc + 1].
constexpr std::array<std::array<double, 3>, 3> kSobelX{{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}};
constexpr std::array<std::array<double, 3>, 3> kSobelY{{{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}}};

}  // namespace

GradientField sobel(const Image& img) {
  const int h = img.height();
  const int w = img.width();
  GradientField out{Image(w, h), Image(w, h)};
  // Written as paired differences so flat regions give exact zeros.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double gx = 0.0;
      double gy = 0.0;
      for (int d = -1; d <= 1; ++d) {
        const double weight = kSobelX[d + 1][2];
        gx += weight * (img.clamped(r + d, c + 1) - img.clamped(r + d, c - 1));
        gy += weight * (img.clamped(r + 1, c + d) - img.clamped(r - 1, c + d));
      }
      out.gx.at(r, c) = gx;
      out.gy.at(r, c) = gy;
    }
  }
  return out;
}

Image sobel_adjoint(const GradientField& field) {
  require_same_shape(field.gx, field.gy, "sobel_adjoint");
  const int h = field.gx.height();
  const int w = field.gx.width();
  Image out(w, h);
  // Scatter each output sample back onto the (edge-clamped) taps that
  // produced it. Clamped taps pile up on the border rows/columns, which is
  // exactly the transpose of replicate padding.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double ux = field.gx.at(r, c);
      const double uy = field.gy.at(r, c);
      if (ux == 0.0 && uy == 0.0) continue;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = std::clamp(r + dr, 0, h - 1);
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = std::clamp(c + dc, 0, w - 1);
          out.at(rr, cc) += kSobelX[dr + 1][dc + 1] * ux + kSobelY[dr + 1][dc + 1] * uy;
        }
      }
    }
  }
  return out;
}

Image magnitude(const GradientField& field) {
  Image mag(field.gx.width(), field.gx.height());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::sqrt(field.gx[i] * field.gx[i] + field.gy[i] * field.gy[i]);
  return mag;
}

Image laplacian(const Image& img) {
  const int h = img.height();
  const int w = img.width();
  Image out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double v = img.at(r, c);
      out.at(r, c) = (img.clamped(r - 1, c) - v) + (img.clamped(r + 1, c) - v) +
                     (img.clamped(r, c - 1) - v) + (img.clamped(r, c + 1) - v);
    }
  }
  return out;
}

int to_level(double v) {
  return static_cast<int>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

Image hist_equalize(const Image& img) {
  std::array<std::uint64_t, 256> counts{};
  for (double v : img.pixels()) ++counts[to_level(v)];

  std::array<std::uint64_t, 256> cumulative{};
  std::uint64_t running = 0;
  std::uint64_t c_min = 0;
  for (std::size_t level = 0; level < 256; ++level) {
    running += counts[level];
    cumulative[level] = running;
    if (c_min == 0 && running > 0) c_min = running;
  }

  const auto n = static_cast<std::uint64_t>(img.size());
  std::array<double, 256> lut{};
  for (std::size_t level = 0; level < 256; ++level) {
    lut[level] = n == c_min ? 1.0
                            : static_cast<double>(cumulative[level] - std::min(cumulative[level], c_min)) /
                                  static_cast<double>(n - c_min);
  }

  Image out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = lut[to_level(img[i])];
  return out;
}

}  // namespace vifuse
