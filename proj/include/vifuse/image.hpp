#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vifuse {

// Single-channel plane of real samples, row-major, no padding.
// Samples are nominally in [0,1]; intermediate planes (edge maps,
// pre-clamp arithmetic) may leave that range.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col) { return data_[index(row, col)]; }
  double at(int row, int col) const { return data_[index(row, col)]; }

  // Edge-clamped read; out-of-range coordinates take the nearest border
  // sample.
  double clamped(int row, int col) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> pixels() { return data_; }
  std::span<const double> pixels() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Three planes (R, G, B) with identical dimensions.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::array<Image, 3> channels;

  ColorImage() = default;
  ColorImage(Image r, Image g, Image b);
  // Gray image replicated into all three planes.
  static ColorImage from_gray(const Image& gray);

  // True when R = G = B at every sample (e.g. loaded from a gray file).
  bool is_gray() const;
};

// Square patch [x0, x0+size) x [y0, y0+size).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int size = 0;

  bool contains(int row, int col) const {
    return col >= x0 && col < x0 + size && row >= y0 && row < y0 + size;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Cb/Cr planes of full-range BT.601 YCbCr; neutral chroma is 0.5.
struct ChromaPlanes {
  Image cb;
  Image cr;
};

// Reads PNG (8-bit gray/gray+alpha/RGB/RGBA) or binary PGM/PPM (maxval 255).
// The format is detected from the file's magic bytes. Alpha is dropped.
ColorImage load_image(const std::filesystem::path& path);

// Writes 8-bit samples round(v*255) clamped to [0,255]. The format follows
// the extension: .png, .pgm or .ppm. A gray Image written as .ppm is
// replicated to RGB; a ColorImage written as .pgm is reduced to luminance.
// The file is written to a temporary sibling and renamed into place, so a
// failed write never leaves a partial file at `path`.
void save_image(const Image& img, const std::filesystem::path& path);
void save_image(const ColorImage& img, const std::filesystem::path& path);

std::pair<Image, ChromaPlanes> to_luminance(const ColorImage& img);
ColorImage recompose(const Image& lum, const ChromaPlanes& chroma);

Image clamp01(const Image& img);

// Throws std::invalid_argument naming both shapes when they differ.
void require_same_shape(const Image& a, const Image& b, const char* what);

std::string shape_string(const Image& img);

}  // namespace vifuse
