#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "vifuse/image.hpp"

namespace vifuse {

// Complementary occlusion masks for one image pair. Inside `patch` every
// pixel is kept by exactly one modality; outside it both masks are 1.
struct MaskPair {
  Image m_ir;
  Image m_vi;
  Rect patch;
  std::uint64_t seed = 0;
};

// Uniform integer in [0, bound) drawn from a 64-bit Mersenne Twister by
// rejection, so the stream is identical on every platform (the standard
// distributions are implementation defined).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Default patch side: floor(min(width, height) / 2), at least 1.
int default_patch_size(int width, int height);

// Draws the patch corner uniformly over all valid positions, then marks
// exactly ceil(k*k/2) patch cells as infrared-visible via a seeded
// Fisher-Yates shuffle. Deterministic in (width, height, k, seed).
MaskPair gen_mask_pair(int width, int height, int k, std::uint64_t seed);

// (ir * m_ir, vi * m_vi), elementwise.
std::pair<Image, Image> apply_masks(const Image& ir, const Image& vi, const MaskPair& masks);

}  // namespace vifuse
