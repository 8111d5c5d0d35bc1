#include <algorithm>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"
#include "vifuse/spatial_ops.hpp"

namespace vifuse {
namespace {

TEST(Sobel, ConstantImageHasNoGradient) {
  const GradientField g = sobel(Image(6, 5, 0.37));
  for (std::size_t i = 0; i < g.gx.size(); ++i) {
    EXPECT_EQ(g.gx[i], 0.0);
    EXPECT_EQ(g.gy[i], 0.0);
  }
}

TEST(Sobel, HorizontalRampInterior) {
  // img(r, c) = c * delta; rows weighted 1,2,1 of a central difference 2*delta.
  const double delta = 0.05;
  Image ramp(7, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 7; ++c) ramp.at(r, c) = c * delta;
  }
  const GradientField g = sobel(ramp);
  for (int r = 1; r < 4; ++r) {
    for (int c = 1; c < 6; ++c) {
      EXPECT_NEAR(g.gx.at(r, c), 8.0 * delta, 1e-14);
      EXPECT_NEAR(g.gy.at(r, c), 0.0, 1e-14);
    }
  }
}

TEST(Sobel, TransposeSymmetry) {
  const Image img = test::random_image(9, 6, 3);
  const GradientField g = sobel(img);
  const GradientField gt = sobel(test::transpose(img));
  EXPECT_LT(test::max_abs_diff(gt.gx, test::transpose(g.gy)), 1e-15);
  EXPECT_LT(test::max_abs_diff(gt.gy, test::transpose(g.gx)), 1e-15);
}

TEST(Sobel, Linearity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Image x = test::random_image(11, 8, seed);
    const Image y = test::random_image(11, 8, seed + 50);
    const double a = 0.7, b = -1.3;
    Image combo(11, 8);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * x[i] + b * y[i];
    const GradientField gc = sobel(combo);
    const GradientField gxf = sobel(x);
    const GradientField gyf = sobel(y);
    for (std::size_t i = 0; i < combo.size(); ++i) {
      EXPECT_NEAR(gc.gx[i], a * gxf.gx[i] + b * gyf.gx[i], 1e-12);
      EXPECT_NEAR(gc.gy[i], a * gxf.gy[i] + b * gyf.gy[i], 1e-12);
    }
  }
}

TEST(SobelAdjoint, InnerProductIdentity) {
  const std::pair<int, int> shapes[] = {{8, 8}, {17, 13}, {1, 1}, {2, 5}, {3, 3}, {16, 9}};
  std::uint64_t seed = 100;
  for (const auto& [w, h] : shapes) {
    const Image x = test::random_image(w, h, seed++, -1.0, 1.0);
    const GradientField u{test::random_image(w, h, seed++, -1.0, 1.0),
                          test::random_image(w, h, seed++, -1.0, 1.0)};
    const GradientField ax = sobel(x);
    const double lhs = test::inner(ax.gx, u.gx) + test::inner(ax.gy, u.gy);
    const double rhs = test::inner(x, sobel_adjoint(u));
    EXPECT_NEAR(lhs, rhs, 1e-10) << w << "x" << h;
  }
}

TEST(SobelAdjoint, ZeroFieldGivesZeroImage) {
  const Image out = sobel_adjoint({Image(5, 4), Image(5, 4)});
  for (double v : out.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(SobelAdjoint, InteriorImpulseStampsKernel) {
  // Oracle from the definition: adjoint(e_p)(q) = sobel(e_q).gx(p), built by
  // brute force over all unit images e_q.
  const int w = 7, h = 6, pr = 3, pc = 2;
  GradientField u{Image(w, h), Image(w, h)};
  u.gx.at(pr, pc) = 1.0;
  const Image adj = sobel_adjoint(u);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      Image unit(w, h);
      unit.at(r, c) = 1.0;
      EXPECT_EQ(adj.at(r, c), sobel(unit).gx.at(pr, pc)) << r << "," << c;
    }
  }
  // Positional stamp of Kx around the impulse.
  const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) EXPECT_EQ(adj.at(pr + dr, pc + dc), kx[dr + 1][dc + 1]);
  }
}

TEST(Laplacian, ConstantAndRamp) {
  const Image flat = laplacian(Image(5, 5, 0.8));
  for (double v : flat.pixels()) EXPECT_EQ(v, 0.0);
  Image ramp(6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) ramp.at(r, c) = 0.1 + 0.03 * r + 0.05 * c;
  }
  const Image lap = laplacian(ramp);
  for (int r = 1; r < 5; ++r) {
    for (int c = 1; c < 5; ++c) EXPECT_NEAR(lap.at(r, c), 0.0, 1e-14);
  }
}

TEST(Laplacian, ImpulseStamp) {
  Image img(5, 5);
  img.at(2, 2) = 1.0;
  const Image lap = laplacian(img);
  EXPECT_EQ(lap.at(2, 2), -4.0);
  EXPECT_EQ(lap.at(1, 2), 1.0);
  EXPECT_EQ(lap.at(3, 2), 1.0);
  EXPECT_EQ(lap.at(2, 1), 1.0);
  EXPECT_EQ(lap.at(2, 3), 1.0);
  EXPECT_EQ(lap.at(1, 1), 0.0);
  EXPECT_EQ(std::accumulate(lap.pixels().begin(), lap.pixels().end(), 0.0), 0.0);
}

TEST(Laplacian, DiscreteDivergenceVanishes) {
  // With replicate padding the boundary flux is zero, so the Laplacian sums
  // to zero over the image; a constant ring is a special case.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Image img = test::random_image(9, 7, seed);
    for (int c = 0; c < 9; ++c) img.at(0, c) = img.at(6, c) = 0.5;
    for (int r = 0; r < 7; ++r) img.at(r, 0) = img.at(r, 8) = 0.5;
    const Image lap = laplacian(img);
    EXPECT_NEAR(std::accumulate(lap.pixels().begin(), lap.pixels().end(), 0.0), 0.0, 1e-10);
    const Image raw = laplacian(test::random_image(6, 11, seed + 9));
    EXPECT_NEAR(std::accumulate(raw.pixels().begin(), raw.pixels().end(), 0.0), 0.0, 1e-10);
  }
}

TEST(HistEqualize, DegenerateHistogramMapsToOne) {
  const Image eq = hist_equalize(Image(4, 3, 0.2));
  for (double v : eq.pixels()) EXPECT_EQ(v, 1.0);
}

TEST(HistEqualize, TwoLevels) {
  Image img(4, 4);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = (i % 2 == 0 ? 10.0 : 200.0) / 255.0;
  const Image eq = hist_equalize(img);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(eq[i], i % 2 == 0 ? 0.0 : 1.0);
}

TEST(HistEqualize, EachLevelOnceIsUniform) {
  Image img(16, 16);
  std::vector<int> levels(256);
  std::iota(levels.begin(), levels.end(), 0);
  std::shuffle(levels.begin(), levels.end(), std::mt19937_64(4));
  for (std::size_t i = 0; i < 256; ++i) img[i] = levels[i] / 255.0;
  const Image eq = hist_equalize(img);
  for (std::size_t i = 0; i < 256; ++i) EXPECT_NEAR(eq[i], levels[i] / 255.0, 1e-15);
}

TEST(HistEqualize, MonotoneBoundedAndPermutationInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Image img = test::random_image(10, 10, seed, 0.2, 0.7);
    const Image eq = hist_equalize(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
      EXPECT_GE(eq[i], 0.0);
      EXPECT_LE(eq[i], 1.0);
      for (std::size_t j = 0; j < img.size(); ++j) {
        if (to_level(img[i]) <= to_level(img[j])) EXPECT_LE(eq[i], eq[j]);
      }
    }
    std::vector<std::size_t> perm(img.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    Image shuffled(10, 10);
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = img[perm[i]];
    const Image eq_shuffled = hist_equalize(shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(eq_shuffled[i], eq[perm[i]]);
  }
}

}  // namespace
}  // namespace vifuse
