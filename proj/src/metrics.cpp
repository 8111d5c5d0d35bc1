#include "vifuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vifuse/spatial_ops.hpp"

namespace vifuse {

namespace {

constexpr double kScale = 255.0;

std::vector<double> scaled(const Image& img) {
  std::vector<double> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] * kScale;
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Plain row-major plane used by the windowed metrics.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
  double clamped(int r, int c) const {
    return at(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1));
  }
};

Plane product(const Plane& a, const Plane& b) {
  Plane out{a.w, a.h, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Separable Gaussian blur, replicate padding, same size.
Plane blur_same(const Plane& in, const std::vector<double>& k) {
  const int radius = static_cast<int>(k.size() / 2);
  Plane tmp{in.w, in.h, std::vector<double>(in.v.size())};
  for (int r = 0; r < in.h; ++r) {
    for (int c = 0; c < in.w; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += k[static_cast<std::size_t>(d + radius)] * in.clamped(r, c + d);
      tmp.v[static_cast<std::size_t>(r) * in.w + c] = s;
    }
  }
  Plane out{in.w, in.h, std::vector<double>(in.v.size())};
  for (int r = 0; r < in.h; ++r) {
    for (int c = 0; c < in.w; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += k[static_cast<std::size_t>(d + radius)] * tmp.clamped(r + d, c);
      out.v[static_cast<std::size_t>(r) * in.w + c] = s;
    }
  }
  return out;
}

// Separable filtering keeping only positions where the window fits.
Plane blur_valid(const Plane& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.w - n + 1;
  const int oh = in.h - n + 1;
  Plane tmp{ow, in.h, std::vector<double>(static_cast<std::size_t>(ow) * in.h)};
  for (int r = 0; r < in.h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += k[static_cast<std::size_t>(d)] * in.at(r, c + d);
      tmp.v[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  Plane out{ow, oh, std::vector<double>(static_cast<std::size_t>(ow) * oh)};
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += k[static_cast<std::size_t>(d)] * tmp.at(r + d, c);
      out.v[static_cast<std::size_t>(r) * ow + c] = s;
    }
  }
  return out;
}

Plane downsample2(const Plane& in) {
  const int ow = (in.w + 1) / 2;
  const int oh = (in.h + 1) / 2;
  Plane out{ow, oh, std::vector<double>(static_cast<std::size_t>(ow) * oh)};
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) out.v[static_cast<std::size_t>(r) * ow + c] = in.at(2 * r, 2 * c);
  }
  return out;
}

Plane to_plane(const Image& img) { return Plane{img.width(), img.height(), scaled(img)}; }

constexpr int kVifScales = 4;
constexpr double kVifNoiseVar = 2.0;
constexpr double kVifFloor = 1e-10;

double vif_sigma(int scale) { return std::ldexp(1.0, scale) / 2.0; }
int vif_radius(int scale) { return static_cast<int>(std::ceil(3.0 * vif_sigma(scale))); }

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

double sigmoid_g(double g) {
  return QabfConstants::kGammaG / (1.0 + std::exp(QabfConstants::kKappaG * (g - QabfConstants::kSigmaG)));
}
double sigmoid_a(double a) {
  return QabfConstants::kGammaA / (1.0 + std::exp(QabfConstants::kKappaA * (a - QabfConstants::kSigmaA)));
}

struct EdgeInfo {
  std::vector<double> strength;
  std::vector<double> orientation;
};

EdgeInfo edges(const Image& img) {
  const GradientField g = sobel(img);
  EdgeInfo e{std::vector<double>(img.size()), std::vector<double>(img.size())};
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double gx = g.gx[i] * kScale;
    const double gy = g.gy[i] * kScale;
    e.strength[i] = std::sqrt(gx * gx + gy * gy);
    e.orientation[i] = gx == 0.0 ? std::numbers::pi / 2.0 : std::atan(gy / gx);
  }
  return e;
}

// Per-pixel Q^{AF} for source A against fused F.
std::vector<double> edge_preservation(const EdgeInfo& a, const EdgeInfo& f) {
  std::vector<double> q(a.strength.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double ga = a.strength[i];
    const double gf = f.strength[i];
    double rel = 1.0;
    if (ga > gf) {
      rel = gf / ga;
    } else if (ga < gf) {
      rel = ga / gf;
    }
    const double aligned =
        1.0 - std::abs(a.orientation[i] - f.orientation[i]) / (std::numbers::pi / 2.0);
    q[i] = sigmoid_g(rel) * sigmoid_a(aligned);
  }
  return q;
}

}  // namespace

MetricsReport MetricsReport::from_values(const std::array<double, 8>& v) {
  return MetricsReport{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

double metric_en(const Image& img) {
  std::array<std::size_t, 256> counts{};
  for (double v : img.pixels()) ++counts[static_cast<std::size_t>(to_level(v))];
  const double n = static_cast<double>(img.size());
  double en = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    en -= p * std::log2(p);
  }
  return en;
}

double metric_sd(const Image& img) {
  const auto x = scaled(img);
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double metric_sf(const Image& img) {
  const Plane p = to_plane(img);
  double rf = 0.0;
  double cf = 0.0;
  if (p.w > 1) {
    for (int r = 0; r < p.h; ++r) {
      for (int c = 1; c < p.w; ++c) {
        const double d = p.at(r, c) - p.at(r, c - 1);
        rf += d * d;
      }
    }
    rf /= static_cast<double>(p.h) * (p.w - 1);
  }
  if (p.h > 1) {
    for (int r = 1; r < p.h; ++r) {
      for (int c = 0; c < p.w; ++c) {
        const double d = p.at(r, c) - p.at(r - 1, c);
        cf += d * d;
      }
    }
    cf /= static_cast<double>(p.h - 1) * p.w;
  }
  return std::sqrt(rf + cf);
}

double metric_ag(const Image& img) {
  const Plane p = to_plane(img);
  if (p.w < 2 || p.h < 2) return 0.0;
  double s = 0.0;
  for (int r = 0; r + 1 < p.h; ++r) {
    for (int c = 0; c + 1 < p.w; ++c) {
      const double dx = p.at(r, c + 1) - p.at(r, c);
      const double dy = p.at(r + 1, c) - p.at(r, c);
      s += std::sqrt((dx * dx + dy * dy) / 2.0);
    }
  }
  return s / (static_cast<double>(p.h - 1) * (p.w - 1));
}

double metric_scd(const Image& fused, const Image& ir, const Image& vi) {
  require_same_shape(fused, ir, "metric_scd");
  require_same_shape(fused, vi, "metric_scd");
  const auto f = scaled(fused);
  const auto a = scaled(ir);
  const auto b = scaled(vi);
  std::vector<double> f_minus_b(f.size()), f_minus_a(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f_minus_b[i] = f[i] - b[i];
    f_minus_a[i] = f[i] - a[i];
  }
  return pearson(f_minus_b, a) + pearson(f_minus_a, b);
}

double vif_single(const Image& fused, const Image& source) {
  require_same_shape(fused, source, "metric_vif");
  const int min_side = 2 * vif_radius(kVifScales - 1) + 1;
  if (std::min(fused.width(), fused.height()) < min_side) {
    throw std::invalid_argument("metric_vif: image " + shape_string(fused) +
                                " is smaller than the coarsest window (" +
                                std::to_string(min_side) + ")");
  }
  Plane ref = to_plane(source);
  Plane dist = to_plane(fused);
  double num = 0.0;
  double den = 0.0;
  for (int scale = 0; scale < kVifScales; ++scale) {
    const auto k = gaussian_kernel(vif_radius(scale), vif_sigma(scale));
    if (scale > 0) {
      ref = downsample2(blur_same(ref, k));
      dist = downsample2(blur_same(dist, k));
    }
    const Plane mu1 = blur_same(ref, k);
    const Plane mu2 = blur_same(dist, k);
    const Plane e11 = blur_same(product(ref, ref), k);
    const Plane e22 = blur_same(product(dist, dist), k);
    const Plane e12 = blur_same(product(ref, dist), k);
    for (std::size_t i = 0; i < ref.v.size(); ++i) {
      double s11 = std::max(e11.v[i] - mu1.v[i] * mu1.v[i], 0.0);
      const double s22 = std::max(e22.v[i] - mu2.v[i] * mu2.v[i], 0.0);
      const double s12 = e12.v[i] - mu1.v[i] * mu2.v[i];

      double g = s12 / (s11 + kVifFloor);
      double sv = s22 - g * s12;
      if (s11 < kVifFloor) {
        g = 0.0;
        sv = s22;
        s11 = 0.0;
      }
      if (s22 < kVifFloor) {
        g = 0.0;
        sv = 0.0;
      }
      if (g < 0.0) {
        sv = s22;
        g = 0.0;
      }
      sv = std::max(sv, kVifFloor);
      num += std::log10(1.0 + g * g * s11 / (sv + kVifNoiseVar));
      den += std::log10(1.0 + s11 / kVifNoiseVar);
    }
  }
  // A featureless source carries no information; a copy of it is still
  // perfectly faithful.
  if (den <= 0.0) return fused == source ? 1.0 : 0.0;
  return num / den;
}

double metric_vif(const Image& fused, const Image& ir, const Image& vi) {
  return 0.5 * (vif_single(fused, ir) + vif_single(fused, vi));
}

double qabf_ceiling() { return sigmoid_g(1.0) * sigmoid_a(1.0); }

double metric_qabf(const Image& fused, const Image& ir, const Image& vi) {
  require_same_shape(fused, ir, "metric_qabf");
  require_same_shape(fused, vi, "metric_qabf");
  const EdgeInfo ea = edges(ir);
  const EdgeInfo eb = edges(vi);
  const EdgeInfo ef = edges(fused);
  const auto qa = edge_preservation(ea, ef);
  const auto qb = edge_preservation(eb, ef);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    num += qa[i] * ea.strength[i] + qb[i] * eb.strength[i];
    den += ea.strength[i] + eb.strength[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

double ssim_single(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_ssim");
  if (std::min(a.width(), a.height()) < kSsimWindow) {
    throw std::invalid_argument("metric_ssim: image " + shape_string(a) +
                                " is smaller than the 11x11 window");
  }
  constexpr double c1 = (0.01 * kScale) * (0.01 * kScale);
  constexpr double c2 = (0.03 * kScale) * (0.03 * kScale);
  const auto k = gaussian_kernel(kSsimWindow / 2, kSsimSigma);
  const Plane x = to_plane(a);
  const Plane y = to_plane(b);
  const Plane mx = blur_valid(x, k);
  const Plane my = blur_valid(y, k);
  const Plane exx = blur_valid(product(x, x), k);
  const Plane eyy = blur_valid(product(y, y), k);
  const Plane exy = blur_valid(product(x, y), k);
  double s = 0.0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double mux = mx.v[i];
    const double muy = my.v[i];
    const double sxx = exx.v[i] - mux * mux;
    const double syy = eyy.v[i] - muy * muy;
    const double sxy = exy.v[i] - mux * muy;
    s += ((2.0 * mux * muy + c1) * (2.0 * sxy + c2)) /
         ((mux * mux + muy * muy + c1) * (sxx + syy + c2));
  }
  return s / static_cast<double>(mx.v.size());
}

double metric_ssim(const Image& fused, const Image& ir, const Image& vi) {
  return 0.5 * (ssim_single(fused, ir) + ssim_single(fused, vi));
}

MetricsReport metrics_all(const Image& fused, const Image& ir, const Image& vi) {
  require_same_shape(fused, ir, "metrics_all");
  require_same_shape(fused, vi, "metrics_all");
  MetricsReport m;
  m.en = metric_en(fused);
  m.sd = metric_sd(fused);
  m.sf = metric_sf(fused);
  m.ag = metric_ag(fused);
  m.scd = metric_scd(fused, ir, vi);
  m.vif = metric_vif(fused, ir, vi);
  m.qabf = metric_qabf(fused, ir, vi);
  m.ssim = metric_ssim(fused, ir, vi);
  return m;
}

std::string metrics_csv_header() { return "path,en,sd,sf,ag,scd,vif,qabf,ssim"; }

std::string metrics_csv_row(const std::string& path, const MetricsReport& m) {
  std::string row = path;
  char buf[32];
  for (double v : m.values()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    row += ',';
    row += buf;
  }
  return row;
}

}  // namespace vifuse
