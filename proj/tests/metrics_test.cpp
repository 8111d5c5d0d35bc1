#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"
#include "vifuse/metrics.hpp"

namespace vifuse {
namespace {

// Integer-code image: codes[i] / 255.
Image from_codes(int w, int h, const std::vector<int>& codes) {
  Image img(w, h);
  for (std::size_t i = 0; i < codes.size(); ++i) img[i] = codes[i] / 255.0;
  return img;
}

Image half_black_white(int w, int h) {
  Image img(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = i < img.size() / 2 ? 0.0 : 1.0;
  return img;
}

double code(const Image& img, int r, int c) { return img.at(r, c) * 255.0; }

TEST(MetricEn, Examples) {
  EXPECT_EQ(metric_en(Image(4, 4, 0.3)), 0.0);
  EXPECT_NEAR(metric_en(half_black_white(4, 4)), 1.0, 1e-12);
  std::vector<int> levels(256);
  for (int i = 0; i < 256; ++i) levels[i] = (i * 37) % 256;
  EXPECT_NEAR(metric_en(from_codes(16, 16, levels)), 8.0, 1e-9);
}

TEST(MetricSd, Examples) {
  EXPECT_EQ(metric_sd(Image(5, 3, 0.7)), 0.0);
  EXPECT_NEAR(metric_sd(half_black_white(4, 4)), 127.5, 1e-9);
  const Image img = test::random_image(4, 4, 1);
  double mu = 0.0;
  for (double v : img.pixels()) mu += v * 255.0 / 16.0;
  double var = 0.0;
  for (double v : img.pixels()) var += (v * 255.0 - mu) * (v * 255.0 - mu) / 16.0;
  EXPECT_NEAR(metric_sd(img), std::sqrt(var), 1e-9);
}

double sf_oracle(const Image& img) {
  double rf = 0.0, cf = 0.0;
  const int w = img.width(), h = img.height();
  for (int r = 0; r < h; ++r) {
    for (int c = 1; c < w; ++c) rf += std::pow(code(img, r, c) - code(img, r, c - 1), 2);
  }
  for (int r = 1; r < h; ++r) {
    for (int c = 0; c < w; ++c) cf += std::pow(code(img, r, c) - code(img, r - 1, c), 2);
  }
  return std::sqrt(rf / (h * (w - 1.0)) + cf / ((h - 1.0) * w));
}

TEST(MetricSf, Examples) {
  EXPECT_EQ(metric_sf(Image(4, 4, 0.2)), 0.0);
  Image stripes(6, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) stripes.at(r, c) = c % 2;
  }
  EXPECT_NEAR(metric_sf(stripes), 255.0, 1e-9);
  const Image img = test::random_image(4, 4, 2);
  EXPECT_NEAR(metric_sf(img), sf_oracle(img), 1e-9);
}

TEST(MetricAg, Examples) {
  EXPECT_EQ(metric_ag(Image(4, 4, 0.2)), 0.0);
  Image ramp(8, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 8; ++c) ramp.at(r, c) = (10 + c) / 255.0;
  }
  EXPECT_NEAR(metric_ag(ramp), std::sqrt(0.5), 1e-9);
  const Image img = test::random_image(4, 4, 3);
  double s = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double dx = code(img, r, c + 1) - code(img, r, c);
      const double dy = code(img, r + 1, c) - code(img, r, c);
      s += std::sqrt((dx * dx + dy * dy) / 2.0);
    }
  }
  EXPECT_NEAR(metric_ag(img), s / 9.0, 1e-9);
}

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

TEST(MetricScd, Examples) {
  const Image ir = test::random_image(8, 8, 4);
  const Image vi = test::random_image(8, 8, 5);
  Image sum(8, 8);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ir[i] + vi[i];
  EXPECT_NEAR(metric_scd(sum, ir, vi), 2.0, 1e-6);
  EXPECT_EQ(metric_scd(test::random_image(8, 8, 6), Image(8, 8, 0.2), Image(8, 8, 0.6)), 0.0);

  const Image f = test::random_image(8, 8, 7);
  std::vector<double> fb, fa, a, b;
  for (std::size_t i = 0; i < f.size(); ++i) {
    fb.push_back(255.0 * (f[i] - vi[i]));
    fa.push_back(255.0 * (f[i] - ir[i]));
    a.push_back(255.0 * ir[i]);
    b.push_back(255.0 * vi[i]);
  }
  EXPECT_NEAR(metric_scd(f, ir, vi), pearson_oracle(fb, a) + pearson_oracle(fa, b), 1e-9);
}

TEST(MetricVif, Examples) {
  const auto [ir, vi] = test::synthetic_pair(40, 1);
  EXPECT_NEAR(metric_vif(ir, ir, ir), 1.0, 1e-6);
  Image half(40, 40);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = 0.5 * ir[i] + 0.5 * ir[i];
  EXPECT_NEAR(metric_vif(half, ir, ir), 1.0, 1e-6);
  EXPECT_LT(metric_vif(Image(40, 40, 0.5), ir, vi), 1e-3);
  const double partial = metric_vif(test::random_image(40, 40, 2), ir, vi);
  EXPECT_GE(partial, 0.0);
  EXPECT_LT(partial, 1.0);
  EXPECT_EQ(metric_vif(Image(30, 30, 0.4), Image(30, 30, 0.4), Image(30, 30, 0.4)), 1.0);
  EXPECT_THROW(metric_vif(Image(20, 40), Image(20, 40), Image(20, 40)), std::invalid_argument);
}

TEST(MetricQabf, CeilingClosedForm) {
  // Both sigmoids at full preservation (G = A = 1), evaluated by hand.
  const double g = 0.9994 / (1.0 + std::exp(-15.0 * (1.0 - 0.5)));
  const double a = 0.9879 / (1.0 + std::exp(-22.0 * (1.0 - 0.8)));
  EXPECT_NEAR(qabf_ceiling(), g * a, 1e-15);
  EXPECT_NEAR(qabf_ceiling(), 0.9748, 1e-3);

  const Image x = test::random_image(16, 16, 8);
  EXPECT_NEAR(metric_qabf(x, x, x), qabf_ceiling(), 1e-6);
}

TEST(MetricQabf, DegenerateCases) {
  const Image x = test::random_image(16, 16, 9);
  EXPECT_LT(metric_qabf(Image(16, 16, 0.5), x, x), 1e-3);
  EXPECT_EQ(metric_qabf(Image(8, 8, 0.1), Image(8, 8, 0.2), Image(8, 8, 0.3)), 0.0);
  const double partial = metric_qabf(test::random_image(16, 16, 10), x, test::random_image(16, 16, 11));
  EXPECT_GT(partial, 0.0);
  EXPECT_LT(partial, qabf_ceiling());
}

// Direct per-window SSIM with an explicit 2-D Gaussian.
double ssim_oracle(const Image& a, const Image& b) {
  double kernel[11][11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      kernel[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += kernel[i][j];
    }
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double sum = 0.0;
  int windows = 0;
  for (int r = 0; r + 11 <= a.height(); ++r) {
    for (int c = 0; c + 11 <= a.width(); ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double wgt = kernel[i][j] / total;
          mx += wgt * code(a, r + i, c + j);
          my += wgt * code(b, r + i, c + j);
        }
      }
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double wgt = kernel[i][j] / total;
          const double dx = code(a, r + i, c + j) - mx, dy = code(b, r + i, c + j) - my;
          sxx += wgt * dx * dx;
          syy += wgt * dy * dy;
          sxy += wgt * dx * dy;
        }
      }
      sum += (2 * mx * my + c1) * (2 * sxy + c2) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
      ++windows;
    }
  }
  return sum / windows;
}

TEST(MetricSsim, Examples) {
  const Image ir = test::random_image(20, 16, 12, 0.3, 0.7);
  EXPECT_NEAR(metric_ssim(ir, ir, ir), 1.0, 1e-9);
  Image inverted(20, 16);
  for (std::size_t i = 0; i < ir.size(); ++i) inverted[i] = 1.0 - ir[i];
  const double s = metric_ssim(inverted, ir, ir);
  EXPECT_LT(s, 1.0);
  EXPECT_NEAR(s, ssim_oracle(inverted, ir), 1e-6);
  const Image vi = test::random_image(20, 16, 13);
  EXPECT_NEAR(ssim_single(vi, ir), ssim_oracle(vi, ir), 1e-6);
  EXPECT_THROW(metric_ssim(Image(10, 12), Image(10, 12), Image(10, 12)), std::invalid_argument);
}

TEST(MetricsAll, ConstantTriple) {
  const Image c(32, 32, 0.4);
  const MetricsReport m = metrics_all(c, c, c);
  EXPECT_EQ(m.en, 0.0);
  EXPECT_EQ(m.sd, 0.0);
  EXPECT_EQ(m.sf, 0.0);
  EXPECT_EQ(m.ag, 0.0);
  EXPECT_EQ(m.scd, 0.0);
  EXPECT_EQ(m.vif, 1.0);
  EXPECT_EQ(m.qabf, 0.0);
  EXPECT_NEAR(m.ssim, 1.0, 1e-12);
}

TEST(MetricsAll, TexturedCopyAndComposition) {
  const auto [ir, vi] = test::synthetic_pair(32, 3);
  const MetricsReport self = metrics_all(ir, ir, ir);
  EXPECT_NEAR(self.vif, 1.0, 1e-6);
  EXPECT_NEAR(self.ssim, 1.0, 1e-9);
  EXPECT_NEAR(self.qabf, qabf_ceiling(), 1e-6);

  const Image f = test::random_image(32, 32, 14);
  const MetricsReport m = metrics_all(f, ir, vi);
  EXPECT_EQ(m.en, metric_en(f));
  EXPECT_EQ(m.sd, metric_sd(f));
  EXPECT_EQ(m.sf, metric_sf(f));
  EXPECT_EQ(m.ag, metric_ag(f));
  EXPECT_EQ(m.scd, metric_scd(f, ir, vi));
  EXPECT_EQ(m.vif, metric_vif(f, ir, vi));
  EXPECT_EQ(m.qabf, metric_qabf(f, ir, vi));
  EXPECT_EQ(m.ssim, metric_ssim(f, ir, vi));
}

TEST(MetricsAll, FlipInvariantScalars) {
  const Image f = test::random_image(12, 12, 15);
  const Image flipped = test::flip_horizontal(f);
  EXPECT_NEAR(metric_en(f), metric_en(flipped), 1e-12);
  EXPECT_NEAR(metric_sd(f), metric_sd(flipped), 1e-9);
  EXPECT_NEAR(metric_sf(f), metric_sf(flipped), 1e-9);
}

TEST(MetricsCsv, RowsRoundTrip) {
  EXPECT_EQ(metrics_csv_header(), "path,en,sd,sf,ag,scd,vif,qabf,ssim");
  const MetricsReport m{7.1, 0.1, 1.0 / 3.0, 2.5, -0.25, 0.9, 0.5, 0.75};
  const std::string row = metrics_csv_row("a/b.png", m);
  std::istringstream in(row);
  std::string cell;
  std::getline(in, cell, ',');
  EXPECT_EQ(cell, "a/b.png");
  for (double expect : m.values()) {
    std::getline(in, cell, ',');
    EXPECT_EQ(std::strtod(cell.c_str(), nullptr), expect);
  }
}

}  // namespace
}  // namespace vifuse
