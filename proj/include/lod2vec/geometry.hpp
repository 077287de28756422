#pragma once

// Planar geometry primitives shared by the vectorization stages.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace lod2vec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;
};

inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Sign of the turn a -> b -> c: >0 left (CCW), <0 right, 0 collinear.
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

/// Shoelace area, positive for counter-clockwise rings. The ring is implicitly closed.
inline double signed_area(std::span<const Point2> ring) {
  double a = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

inline bool on_segment(Point2 p, Point2 a, Point2 b) {
  return orient(a, b, p) == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

/// True when the open segments cross at a single interior point of both.
inline bool segments_cross_properly(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

/// True for any contact between the closed segments.
inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  if (segments_cross_properly(a, b, c, d)) return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d);
}

enum class Containment { Outside, Boundary, Inside };

/// Point location against a closed ring (crossing-number test with exact boundary check).
inline Containment locate(Point2 p, std::span<const Point2> ring) {
  bool inside = false;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % n];
    if (on_segment(p, a, b)) return Containment::Boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

/// Simple ring: no two non-adjacent edges touch and adjacent edges meet only at their shared vertex.
inline bool is_simple_ring(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j)
      if (ring[i] == ring[j]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 c = ring[j], d = ring[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared vertex only: the far endpoint must not lie on the other edge.
        const Point2 far_i = (j == i + 1) ? a : b;
        const Point2 far_j = (j == i + 1) ? d : c;
        if (on_segment(far_j, a, b) || on_segment(far_i, c, d)) return false;
      } else if (segments_intersect(a, b, c, d)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace lod2vec
