#pragma once

// 8-connected component labeling (two-pass union-find) and corner-to-instance
// assignment.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <vector>

#include "lod2vec/corner_nms.hpp"
#include "lod2vec/raster.hpp"

namespace lod2vec {

/// Disjoint-set forest with union by rank and path compression.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0u);
    rank_.assign(n, 0);
  }

  std::uint32_t add() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    rank_.push_back(0);
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // 0 = background, components are 1..n_components
  int n_components = 0;

  int operator()(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }
};

/// Labels the nonzero cells of a width*height mask. Labels are dense and
/// numbered in order of first encounter in a row-major scan.
inline LabelMap label_mask(std::span<const std::uint8_t> mask, int width, int height) {
  if (mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("label_mask: mask size does not match dimensions");
  LabelMap out;
  out.width = width;
  out.height = height;
  out.labels.assign(mask.size(), 0);
  // Pass 1: provisional labels (1-based) with equivalences in the forest.
  UnionFind uf(1);
  auto lab = [&](int r, int c) -> int& { return out.labels[static_cast<std::size_t>(r) * width + c]; };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!mask[static_cast<std::size_t>(r) * width + c]) continue;
      // Already-visited neighbours: W, NW, N, NE.
      int first = 0;
      auto visit = [&](int y, int x) {
        if (y < 0 || x < 0 || x >= width) return;
        const int l = lab(y, x);
        if (!l) return;
        if (!first) first = l;
        else if (l != first) uf.unite(static_cast<std::uint32_t>(first), static_cast<std::uint32_t>(l));
      };
      visit(r, c - 1);
      visit(r - 1, c - 1);
      visit(r - 1, c);
      visit(r - 1, c + 1);
      lab(r, c) = first ? first : static_cast<int>(uf.add());
    }
  }
  // Pass 2: resolve roots and renumber in first-encounter order.
  std::vector<int> dense(uf.size(), 0);
  for (auto& l : out.labels) {
    if (!l) continue;
    const auto root = uf.find(static_cast<std::uint32_t>(l));
    if (!dense[root]) dense[root] = ++out.n_components;
    l = dense[root];
  }
  return out;
}

/// Components of {value > threshold}; nodata is background. A threshold of 0
/// labels every nonzero pixel.
inline LabelMap label_components(const Raster& prob, float threshold) {
  std::vector<std::uint8_t> mask(prob.size());
  const auto v = prob.values();
  for (std::size_t i = 0; i < v.size(); ++i) mask[i] = !prob.is_nodata(v[i]) && v[i] > threshold;
  return label_mask(mask, prob.width(), prob.height());
}

/// Each corner takes the label of the nearest labeled pixel within
/// `search_radius` (Chebyshev distance, ties to the smallest label). Corners
/// with nothing in range get instance 0.
inline CornerSet assign_corners_to_instances(CornerSet corners, const LabelMap& instances,
                                             int search_radius = kDefaultNmsHalf) {
  for (auto& c : corners) {
    if (!instances.contains(c.row, c.col)) throw Error("assign_corners_to_instances: corner outside label map");
    int best_label = 0;
    int best_dist = search_radius + 1;
    for (int y = c.row - search_radius; y <= c.row + search_radius; ++y) {
      for (int x = c.col - search_radius; x <= c.col + search_radius; ++x) {
        if (!instances.contains(y, x)) continue;
        const int l = instances(y, x);
        if (!l) continue;
        const int d = std::max(std::abs(y - c.row), std::abs(x - c.col));
        if (d < best_dist || (d == best_dist && l < best_label)) {
          best_dist = d;
          best_label = l;
        }
      }
    }
    c.instance_id = best_label;
  }
  return corners;
}

}  // namespace lod2vec
