#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>

#include "vifuse/image.hpp"

namespace vifuse::test {

inline Image random_image(int width, int height, std::uint64_t seed, double lo = 0.0,
                          double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Image img(width, height);
  for (double& v : img.pixels()) v = dist(rng);
  return img;
}

inline Image transpose(const Image& img) {
  Image out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.at(c, r) = img.at(r, c);
  }
  return out;
}

inline Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.at(r, c) = img.at(r, img.width() - 1 - c);
  }
  return out;
}

inline double inner(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Synthetic registered pair built from ramps, steps and Gaussian blobs.
// The infrared plane carries bright blobs on a dim ramp; the visible plane
// carries step edges and a cross ramp. Varies with `seed`.
inline std::pair<Image, Image> synthetic_pair(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image ir(size, size);
  Image vi(size, size);

  const double ir_base = 0.1 + 0.2 * u(rng);
  const double ir_slope = 0.2 * u(rng);
  const double vi_base = 0.2 + 0.2 * u(rng);
  const double vi_slope = 0.3 * u(rng);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      ir.at(r, c) = ir_base + ir_slope * c / size;
      vi.at(r, c) = vi_base + vi_slope * r / size;
    }
  }

  const int blobs = 2 + static_cast<int>(u(rng) * 3);
  for (int b = 0; b < blobs; ++b) {
    const double cr = u(rng) * size;
    const double cc = u(rng) * size;
    const double sigma = 2.0 + u(rng) * size / 8.0;
    const double amp = 0.3 + 0.4 * u(rng);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        ir.at(r, c) += amp * std::exp(-d2 / (2.0 * sigma * sigma));
      }
    }
  }

  const int steps = 2 + static_cast<int>(u(rng) * 3);
  for (int s = 0; s < steps; ++s) {
    const bool vertical = u(rng) < 0.5;
    const int pos = static_cast<int>(size * (0.2 + 0.6 * u(rng)));
    const double amp = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 0.2 * u(rng));
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        if ((vertical ? c : r) >= pos) vi.at(r, c) += amp;
      }
    }
  }

  return {clamp01(ir), clamp01(vi)};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("vifuse_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace vifuse::test
