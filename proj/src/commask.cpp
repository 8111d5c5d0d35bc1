#include "vifuse/commask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vifuse {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  // Largest multiple of `bound` representable; draws at or above it are
  // rejected to keep the result unbiased.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

int default_patch_size(int width, int height) { return std::max(1, std::min(width, height) / 2); }

MaskPair gen_mask_pair(int width, int height, int k, std::uint64_t seed) {
  if (width < 1 || height < 1) throw std::invalid_argument("gen_mask_pair: empty image");
  if (k < 1 || k > std::min(width, height)) {
    throw std::invalid_argument("patch size k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(std::min(width, height)) + "] for " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  std::mt19937_64 rng(seed);
  MaskPair masks{Image(width, height, 1.0), Image(width, height, 1.0), Rect{}, seed};
  masks.patch.x0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(width - k + 1)));
  masks.patch.y0 = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(height - k + 1)));
  masks.patch.size = k;

  const std::size_t cells = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = cells - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i + 1));
    std::swap(order[i], order[j]);
  }

  const std::size_t ones = (cells + 1) / 2;
  for (std::size_t n = 0; n < cells; ++n) {
    const int row = masks.patch.y0 + static_cast<int>(order[n] / static_cast<std::size_t>(k));
    const int col = masks.patch.x0 + static_cast<int>(order[n] % static_cast<std::size_t>(k));
    const bool keep_ir = n < ones;
    masks.m_ir.at(row, col) = keep_ir ? 1.0 : 0.0;
    masks.m_vi.at(row, col) = keep_ir ? 0.0 : 1.0;
  }
  return masks;
}

std::pair<Image, Image> apply_masks(const Image& ir, const Image& vi, const MaskPair& masks) {
  require_same_shape(ir, vi, "apply_masks");
  require_same_shape(ir, masks.m_ir, "apply_masks");
  require_same_shape(ir, masks.m_vi, "apply_masks");
  Image ir_out = ir;
  Image vi_out = vi;
  for (std::size_t i = 0; i < ir.size(); ++i) {
    ir_out[i] *= masks.m_ir[i];
    vi_out[i] *= masks.m_vi[i];
  }
  return {std::move(ir_out), std::move(vi_out)};
}

}  // namespace vifuse
