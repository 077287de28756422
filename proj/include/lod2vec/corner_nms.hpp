#pragma once

// Windowed non-maximum suppression of a corner probability raster.

#include <vector>

#include "lod2vec/raster.hpp"

namespace lod2vec {

struct Corner {
  int row = 0;
  int col = 0;
  float prob = 0.0f;
  int instance_id = 0;  // 0 = unassigned

  Pixel pixel() const { return {row, col}; }
  friend bool operator==(const Corner&, const Corner&) = default;
};

/// Corners sorted by (row, col).
using CornerSet = std::vector<Corner>;

inline constexpr int kDefaultNmsHalf = 2;
inline constexpr float kDefaultCornerMinProb = 0.5f;

/// Sequential suppression in row-major order on a working copy. A candidate
/// (value >= min_prob and > 0) is dropped if any pixel in its window is
/// strictly larger; otherwise every other pixel in its window is zeroed.
/// Ties therefore go to the earlier pixel. Survivors are pairwise more than
/// `half` apart in Chebyshev distance.
inline CornerSet nms_select(const Raster& corner_prob, int half = kDefaultNmsHalf,
                            float min_prob = kDefaultCornerMinProb) {
  if (half < 1) throw Error("nms_select: half must be >= 1");
  if (!(min_prob >= 0.0f && min_prob <= 1.0f)) throw Error("nms_select: min_prob must lie in [0,1]");
  const int w = corner_prob.width();
  const int h = corner_prob.height();
  std::vector<float> work(corner_prob.values().begin(), corner_prob.values().end());
  for (auto& v : work)
    if (corner_prob.is_nodata(v)) v = 0.0f;
  auto at = [&](int r, int c) -> float& { return work[static_cast<std::size_t>(r) * w + c]; };

  CornerSet out;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float v = at(r, c);
      if (!(v > 0.0f) || v < min_prob) continue;
      const int r0 = std::max(0, r - half), r1 = std::min(h - 1, r + half);
      const int c0 = std::max(0, c - half), c1 = std::min(w - 1, c + half);
      bool beaten = false;
      for (int y = r0; y <= r1 && !beaten; ++y)
        for (int x = c0; x <= c1; ++x)
          if (at(y, x) > v) {
            beaten = true;
            break;
          }
      if (beaten) {
        at(r, c) = 0.0f;
        continue;
      }
      for (int y = r0; y <= r1; ++y)
        for (int x = c0; x <= c1; ++x)
          if (y != r || x != c) at(y, x) = 0.0f;
    }
  }
  // A survivor zeroes its whole window, so no later pixel can suppress it.
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (const float v = at(r, c); v > 0.0f && v >= min_prob) out.push_back({r, c, v, 0});
  return out;
}

}  // namespace lod2vec
