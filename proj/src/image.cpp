#include "vifuse/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <stdexcept>
#include <system_error>

#include "vifuse/errors.hpp"

namespace vifuse {

namespace fs = std::filesystem;

// BT.601 luma weights and the full-range chroma scale factors
// 2(1 - Kb) and 2(1 - Kr).
constexpr double kKr = 0.299;
constexpr double kKg = 0.587;
constexpr double kKb = 0.114;
constexpr double kCbScale = 2.0 * (1.0 - kKb);
constexpr double kCrScale = 2.0 * (1.0 - kKr);

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("image data length does not match " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
}

double Image::clamped(int row, int col) const {
  row = std::clamp(row, 0, height_ - 1);
  col = std::clamp(col, 0, width_ - 1);
  return data_[index(row, col)];
}

ColorImage::ColorImage(Image r, Image g, Image b)
    : width(r.width()), height(r.height()), channels{std::move(r), std::move(g), std::move(b)} {
  if (!channels[0].same_shape(channels[1]) || !channels[0].same_shape(channels[2])) {
    throw std::invalid_argument("color planes must share dimensions");
  }
}

ColorImage ColorImage::from_gray(const Image& gray) { return ColorImage(gray, gray, gray); }

bool ColorImage::is_gray() const {
  return channels[0] == channels[1] && channels[0] == channels[2];
}

std::string shape_string(const Image& img) {
  return std::to_string(img.width()) + "x" + std::to_string(img.height());
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + shape_string(a) +
                                " vs " + shape_string(b) + ")");
  }
}

Image clamp01(const Image& img) {
  Image out = img;
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::pair<Image, ChromaPlanes> to_luminance(const ColorImage& img) {
  const Image& r = img.channels[0];
  const Image& g = img.channels[1];
  const Image& b = img.channels[2];
  Image y(img.width, img.height);
  ChromaPlanes chroma{Image(img.width, img.height), Image(img.width, img.height)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double lum = kKr * r[i] + kKg * g[i] + kKb * b[i];
    y[i] = lum;
    chroma.cb[i] = (b[i] - lum) / kCbScale + 0.5;
    chroma.cr[i] = (r[i] - lum) / kCrScale + 0.5;
  }
  return {std::move(y), std::move(chroma)};
}

ColorImage recompose(const Image& lum, const ChromaPlanes& chroma) {
  require_same_shape(lum, chroma.cb, "recompose");
  require_same_shape(lum, chroma.cr, "recompose");
  Image r(lum.width(), lum.height());
  Image g(lum.width(), lum.height());
  Image b(lum.width(), lum.height());
  for (std::size_t i = 0; i < lum.size(); ++i) {
    const double y = lum[i];
    const double rv = y + kCrScale * (chroma.cr[i] - 0.5);
    const double bv = y + kCbScale * (chroma.cb[i] - 0.5);
    const double gv = (y - kKr * rv - kKb * bv) / kKg;
    r[i] = std::clamp(rv, 0.0, 1.0);
    g[i] = std::clamp(gv, 0.0, 1.0);
    b[i] = std::clamp(bv, 0.0, 1.0);
  }
  return ColorImage(std::move(r), std::move(g), std::move(b));
}

namespace {

std::uint8_t quantize(double v) {
  const double code = std::round(v * 255.0);
  return static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

ColorImage planes_from_interleaved(const std::uint8_t* src, int width, int height,
                                   int channels, double maxval) {
  if (channels == 1) {
    Image gray(width, height);
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = src[i] / maxval;
    return ColorImage::from_gray(gray);
  }
  Image r(width, height), g(width, height), b(width, height);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = src[3 * i + 0] / maxval;
    g[i] = src[3 * i + 1] / maxval;
    b[i] = src[3 * i + 2] / maxval;
  }
  return ColorImage(std::move(r), std::move(g), std::move(b));
}

ColorImage decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("invalid PNG " + path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError("unsupported PNG bit depth (only 8-bit is supported): " + path.string());
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw IoError("zero-dimension image: " + path.string());
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    throw IoError("PNG decode failed for " + path.string() + ": " + image.message);
  }
  return planes_from_interleaved(buffer.data(), static_cast<int>(image.width),
                                 static_cast<int>(image.height), color ? 3 : 1, 255.0);
}

// Parses the next header integer of a PNM file, skipping whitespace and
// '#' comments.
long pnm_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                    const fs::path& path) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  long value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 9) {
    value = value * 10 + (bytes[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0) throw IoError("malformed PNM header: " + path.string());
  return value;
}

ColorImage decode_pnm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  const int channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const long width = pnm_header_int(bytes, pos, path);
  const long height = pnm_header_int(bytes, pos, path);
  const long maxval = pnm_header_int(bytes, pos, path);
  if (width == 0 || height == 0) throw IoError("zero-dimension image: " + path.string());
  if (maxval < 1 || maxval > 255) {
    throw IoError("unsupported PNM maxval " + std::to_string(maxval) + ": " + path.string());
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw IoError("malformed PNM header: " + path.string());
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                           static_cast<std::size_t>(channels);
  if (bytes.size() - pos < need) throw IoError("truncated PNM data: " + path.string());
  return planes_from_interleaved(bytes.data() + pos, static_cast<int>(width),
                                 static_cast<int>(height), channels,
                                 static_cast<double>(maxval));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void write_bytes_atomically(const fs::path& path,
                            const std::function<void(const fs::path&)>& writer) {
  fs::path tmp = path;
  tmp += ".partial";
  try {
    writer(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

void encode(const fs::path& path, int width, int height, int channels,
            const std::vector<std::uint8_t>& interleaved) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_bytes_atomically(path, [&](const fs::path& tmp) {
      png_image image;
      std::memset(&image, 0, sizeof(image));
      image.version = PNG_IMAGE_VERSION;
      image.width = static_cast<png_uint_32>(width);
      image.height = static_cast<png_uint_32>(height);
      image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
      if (!png_image_write_to_file(&image, tmp.c_str(), 0, interleaved.data(), 0, nullptr)) {
        throw IoError("cannot write " + path.string() + ": " + image.message);
      }
    });
    return;
  }
  if (ext == ".pgm" || ext == ".ppm") {
    write_bytes_atomically(path, [&](const fs::path& tmp) {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw IoError("cannot open " + path.string() + " for writing");
      out << (channels == 1 ? "P5" : "P6") << "\n" << width << " " << height << "\n255\n";
      out.write(reinterpret_cast<const char*>(interleaved.data()),
                static_cast<std::streamsize>(interleaved.size()));
      out.close();
      if (!out) throw IoError("write failed: " + path.string());
    });
    return;
  }
  throw IoError("unsupported output format '" + ext + "' for " + path.string());
}

}  // namespace

ColorImage load_image(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes, path);
  }
  throw IoError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const fs::path& path) {
  if (lower_extension(path) == ".ppm") {
    save_image(ColorImage::from_gray(img), path);
    return;
  }
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = quantize(img[i]);
  encode(path, img.width(), img.height(), 1, bytes);
}

void save_image(const ColorImage& img, const fs::path& path) {
  if (lower_extension(path) == ".pgm") {
    save_image(to_luminance(img).first, path);
    return;
  }
  const std::size_t n = img.channels[0].size();
  std::vector<std::uint8_t> bytes(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) bytes[3 * i + c] = quantize(img.channels[c][i]);
  }
  encode(path, img.width, img.height, 3, bytes);
}

}  // namespace vifuse
