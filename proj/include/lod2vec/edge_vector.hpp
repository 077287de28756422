#pragma once

// Roof edge vectorization: decide which same-building corner pairs are joined
// by a straight edge.
//
// A pair is accepted when either
//   (1) the mean edge probability over a thin line buffer reaches tau_mean, or
//   (2) the two corners fall in the same 8-connected component of the
//       thresholded edge map restricted to a rectangle buffer around them;
// accepted pairs whose rectangle buffer strictly contains a third corner of
// the same building are then discarded as redundant.
//
// Buffers are rectangles in pixel space: pixel centres within width/2 of the
// segment axis and between its endpoints (flat caps).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "lod2vec/components.hpp"
#include "lod2vec/corner_nms.hpp"
#include "lod2vec/parallel.hpp"
#include "lod2vec/raster.hpp"

namespace lod2vec {

struct EdgeParams {
  double buffer_width = 7.0;  // rectangle buffer for connectivity and redundancy
  double line_width = 1.0;    // line buffer for the mean-probability test
  float tau_mean = 0.5f;
  float tau_bin = 0.5f;
  int snap_radius = kDefaultNmsHalf;
};

/// Undirected edge between corner indices a < b of one building.
struct Edge {
  int instance_id = 0;
  int a = 0;
  int b = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Accepted edges ordered by (instance_id, a, b).
using EdgeSet = std::vector<Edge>;

struct EdgeCandidate {
  int a = 0;
  int b = 0;
  double mean_prob = 0.0;
  bool cond_line = false;
  bool cond_ccl = false;
  bool accepted = false;  // after the redundancy filter
};

namespace detail {

/// Axis frame of segment pq in (col, row) pixel space.
struct SegmentFrame {
  double px, py, ux, uy, length;

  SegmentFrame(const Corner& p, const Corner& q) : px(p.col), py(p.row) {
    const double dx = q.col - p.col, dy = q.row - p.row;
    length = std::hypot(dx, dy);
    ux = length > 0 ? dx / length : 0.0;
    uy = length > 0 ? dy / length : 0.0;
  }
  double along(double x, double y) const { return (x - px) * ux + (y - py) * uy; }
  double across(double x, double y) const { return std::abs(-(x - px) * uy + (y - py) * ux); }
};

/// Calls fn(row, col) for each raster pixel whose centre lies in the closed
/// rectangle buffer of pq.
template <class Fn>
void for_each_buffer_pixel(int width, int height, const Corner& p, const Corner& q, double buffer_width, Fn&& fn) {
  const SegmentFrame f(p, q);
  const double half = buffer_width / 2.0;
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(p.row, q.row) - half)));
  const int r1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(p.row, q.row) + half)));
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(p.col, q.col) - half)));
  const int c1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(p.col, q.col) + half)));
  constexpr double eps = 1e-9;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double t = f.along(c, r);
      if (t < -eps || t > f.length + eps) continue;
      if (f.across(c, r) > half + eps) continue;
      fn(r, c);
    }
  }
}

}  // namespace detail

/// Mean edge probability over the line buffer of pq; nodata pixels are
/// skipped and an empty buffer gives 0.
inline double line_buffer_mean(const Raster& edge_prob, const Corner& p, const Corner& q, double width = 1.0) {
  if (p.pixel() == q.pixel()) throw Error("line_buffer_mean: identical endpoints");
  double sum = 0.0;
  std::size_t n = 0;
  detail::for_each_buffer_pixel(edge_prob.width(), edge_prob.height(), p, q, width, [&](int r, int c) {
    const float v = edge_prob(r, c);
    if (edge_prob.is_nodata(v)) return;
    sum += v;
    ++n;
  });
  return n ? sum / static_cast<double>(n) : 0.0;
}

/// Thresholds (> tau_bin) the rectangle buffer of pq, labels it with
/// 8-connectivity, snaps each endpoint to the nearest foreground buffer pixel
/// within `snap_radius` (Chebyshev; ties to the first in row-major order) and
/// reports whether both snaps land in the same component.
inline bool rect_buffer_connected(const Raster& edge_prob, const Corner& p, const Corner& q, double width = 7.0,
                                  float tau_bin = 0.5f, int snap_radius = kDefaultNmsHalf) {
  if (p.pixel() == q.pixel()) throw Error("rect_buffer_connected: identical endpoints");
  const double half = width / 2.0;
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(p.row, q.row) - half)));
  const int r1 = std::min(edge_prob.height() - 1, static_cast<int>(std::ceil(std::max(p.row, q.row) + half)));
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(p.col, q.col) - half)));
  const int c1 = std::min(edge_prob.width() - 1, static_cast<int>(std::ceil(std::max(p.col, q.col) + half)));
  if (r1 < r0 || c1 < c0) return false;
  const int bw = c1 - c0 + 1, bh = r1 - r0 + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  detail::for_each_buffer_pixel(edge_prob.width(), edge_prob.height(), p, q, width, [&](int r, int c) {
    const float v = edge_prob(r, c);
    if (!edge_prob.is_nodata(v) && v > tau_bin) mask[static_cast<std::size_t>(r - r0) * bw + (c - c0)] = 1;
  });
  const LabelMap labels = label_mask(mask, bw, bh);
  auto snap = [&](const Corner& k) {
    int best = 0, best_d = snap_radius + 1;
    for (int r = k.row - snap_radius; r <= k.row + snap_radius; ++r)
      for (int c = k.col - snap_radius; c <= k.col + snap_radius; ++c) {
        if (r < r0 || r > r1 || c < c0 || c > c1) continue;
        const int l = labels(r - r0, c - c0);
        if (!l) continue;
        const int d = std::max(std::abs(r - k.row), std::abs(c - k.col));
        if (d < best_d) {
          best_d = d;
          best = l;
        }
      }
    return best;
  };
  const int lp = snap(p);
  const int lq = snap(q);
  return lp != 0 && lp == lq;
}

/// True when `k` lies strictly inside the rectangle buffer of pq.
inline bool strictly_inside_buffer(const Corner& p, const Corner& q, const Corner& k, double width = 7.0) {
  const detail::SegmentFrame f(p, q);
  const double t = f.along(k.col, k.row);
  return t > 0.0 && t < f.length && f.across(k.col, k.row) < width / 2.0;
}

/// Drops every pair whose rectangle buffer strictly contains another corner
/// of the same instance. Endpoints are exempt.
inline EdgeSet redundancy_filter(const EdgeSet& candidates, const CornerSet& corners, double width = 7.0) {
  EdgeSet out;
  for (const Edge& e : candidates) {
    const Corner& p = corners.at(e.a);
    const Corner& q = corners.at(e.b);
    bool blocked = false;
    for (std::size_t k = 0; k < corners.size() && !blocked; ++k) {
      if (static_cast<int>(k) == e.a || static_cast<int>(k) == e.b) continue;
      if (corners[k].instance_id != e.instance_id) continue;
      blocked = strictly_inside_buffer(p, q, corners[k], width);
    }
    if (!blocked) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Corner indices grouped by nonzero instance id, ascending.
inline std::map<int, std::vector<int>> corners_by_instance(const CornerSet& corners) {
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < corners.size(); ++i)
    if (corners[i].instance_id != 0) groups[corners[i].instance_id].push_back(static_cast<int>(i));
  return groups;
}

/// Evaluates both conditions for every same-instance pair of one building.
inline std::vector<EdgeCandidate> evaluate_pairs(const Raster& edge_prob, const CornerSet& corners,
                                                 const std::vector<int>& members, const EdgeParams& params) {
  std::vector<EdgeCandidate> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const Corner& p = corners[members[i]];
      const Corner& q = corners[members[j]];
      EdgeCandidate c;
      c.a = std::min(members[i], members[j]);
      c.b = std::max(members[i], members[j]);
      c.mean_prob = line_buffer_mean(edge_prob, p, q, params.line_width);
      c.cond_line = c.mean_prob >= params.tau_mean;
      c.cond_ccl = rect_buffer_connected(edge_prob, p, q, params.buffer_width, params.tau_bin, params.snap_radius);
      out.push_back(c);
    }
  }
  return out;
}

/// Full edge vectorization. Corners must already carry instance ids; pairs in
/// different instances (or instance 0) are never considered.
inline EdgeSet vectorize_edges(const Raster& edge_prob, const CornerSet& corners, const EdgeParams& params = {},
                               int workers = 1) {
  const auto groups = corners_by_instance(corners);
  std::vector<std::pair<int, const std::vector<int>*>> jobs;
  for (const auto& [id, members] : groups) jobs.emplace_back(id, &members);
  std::vector<EdgeSet> per_instance(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const auto [id, members] = jobs[j];
    EdgeSet accepted;
    for (const auto& c : evaluate_pairs(edge_prob, corners, *members, params))
      if (c.cond_line || c.cond_ccl) accepted.push_back({id, c.a, c.b});
    per_instance[j] = redundancy_filter(accepted, corners, params.buffer_width);
  });
  EdgeSet out;
  for (auto& s : per_instance) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace lod2vec
