#pragma once

// Roof polygon generation: bounded faces of a straight-line planar graph.
//
// Every undirected edge contributes two half-edges. Outgoing half-edges are
// sorted by angle at each vertex; the successor of u->v is v->w where w is the
// neighbour immediately clockwise of u around v. Following successors walks
// each face with the face on its left, so bounded faces come out
// counter-clockwise (positive area) and each component's outer face clockwise.
//
// A bounded face is returned only when its boundary, after removing edges the
// walk traverses twice (dangling trees and bridges), is one simple cycle and
// no other cycle-bearing component lies inside it. This matches "all simple
// cycles, minus those covering another cycle".

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lod2vec/components.hpp"
#include "lod2vec/geometry.hpp"

namespace lod2vec {

/// Vertices are in the pixel-unit world frame (x = col, y = -row).
struct PlanarGraph {
  std::vector<Point2> vertices;
  std::vector<std::pair<int, int>> edges;
};

struct RoofPolygon {
  std::vector<int> ring;  // vertex indices, counter-clockwise, not repeated at the end
  int instance_id = 0;
  friend auto operator<=>(const RoofPolygon&, const RoofPolygon&) = default;
};

inline std::vector<Point2> ring_points(const RoofPolygon& p, const std::vector<Point2>& vertices) {
  std::vector<Point2> pts;
  pts.reserve(p.ring.size());
  for (int v : p.ring) pts.push_back(vertices.at(v));
  return pts;
}

/// Simple, counter-clockwise, positive area, at least three vertices.
inline bool validate_polygon(std::span<const Point2> ring) {
  return ring.size() >= 3 && signed_area(ring) > 0.0 && is_simple_ring(ring);
}

inline bool validate_polygon(const RoofPolygon& p, const std::vector<Point2>& vertices) {
  for (int v : p.ring)
    if (v < 0 || v >= static_cast<int>(vertices.size())) return false;
  return validate_polygon(ring_points(p, vertices));
}

/// Rejects self-loops, duplicate edges, coincident vertices and any contact
/// between edges other than a shared endpoint. Messages name the offending edges.
inline void check_planar_embedding(const PlanarGraph& g) {
  const int n = static_cast<int>(g.vertices.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : g.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw Error("planar graph: edge references missing vertex");
    if (a == b) throw Error("planar graph: self-loop at vertex " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second)
      throw Error("planar graph: duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
  std::map<Point2, int> positions;
  for (int v = 0; v < n; ++v)
    if (auto [it, ok] = positions.emplace(g.vertices[v], v); !ok)
      throw Error("planar graph: vertices " + std::to_string(it->second) + " and " + std::to_string(v) +
                  " coincide");
  auto name = [](std::pair<int, int> e) {
    return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
  };
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto [a, b] = g.edges[i];
    const Point2 pa = g.vertices[a], pb = g.vertices[b];
    for (std::size_t j = i + 1; j < g.edges.size(); ++j) {
      const auto [c, d] = g.edges[j];
      const Point2 pc = g.vertices[c], pd = g.vertices[d];
      const bool shares = a == c || a == d || b == c || b == d;
      if (!shares) {
        if (segments_intersect(pa, pb, pc, pd))
          throw Error("non-planar embedding: edges " + name(g.edges[i]) + " and " + name(g.edges[j]) + " intersect");
        continue;
      }
      // Edges sharing a vertex may only meet there.
      const int s = (a == c || a == d) ? a : b;
      const Point2 far_i = g.vertices[s == a ? b : a];
      const Point2 far_j = g.vertices[(s == c) ? d : c];
      if (on_segment(far_j, pa, pb) || on_segment(far_i, pc, pd))
        throw Error("non-planar embedding: edges " + name(g.edges[i]) + " and " + name(g.edges[j]) + " overlap");
    }
  }
  // A vertex sitting inside an edge it does not bound.
  for (const auto& e : g.edges)
    for (int v = 0; v < n; ++v)
      if (v != e.first && v != e.second && on_segment(g.vertices[v], g.vertices[e.first], g.vertices[e.second]))
        throw Error("non-planar embedding: vertex " + std::to_string(v) + " lies on edge " + name(e));
}

inline std::vector<RoofPolygon> extract_faces(const PlanarGraph& g, int instance_id = 0) {
  check_planar_embedding(g);
  const int n = static_cast<int>(g.vertices.size());

  // Neighbours sorted counter-clockwise by direction angle.
  std::vector<std::vector<int>> nbrs(n);
  for (const auto& [a, b] : g.edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  for (int v = 0; v < n; ++v) {
    const Point2 o = g.vertices[v];
    std::sort(nbrs[v].begin(), nbrs[v].end(), [&](int p, int q) {
      const Point2 dp = g.vertices[p] - o, dq = g.vertices[q] - o;
      const double ap = std::atan2(dp.y, dp.x), aq = std::atan2(dq.y, dq.x);
      if (ap != aq) return ap < aq;
      return norm(dp) < norm(dq);
    });
  }
  auto slot = [&](int v, int u) {
    return static_cast<int>(std::find(nbrs[v].begin(), nbrs[v].end(), u) - nbrs[v].begin());
  };
  auto successor = [&](int u, int v) {
    const int deg = static_cast<int>(nbrs[v].size());
    return nbrs[v][(slot(v, u) - 1 + deg) % deg];
  };

  // Components, and whether each one contains a cycle.
  UnionFind uf(n);
  for (const auto& [a, b] : g.edges) uf.unite(a, b);
  std::map<std::uint32_t, std::pair<int, int>> comp_size;  // root -> (vertices, edges)
  for (int v = 0; v < n; ++v) comp_size[uf.find(v)].first++;
  for (const auto& [a, b] : g.edges) comp_size[uf.find(a)].second++;

  std::set<std::pair<int, int>> visited;
  std::vector<RoofPolygon> faces;
  for (int start = 0; start < n; ++start) {
    for (int first_to : nbrs[start]) {
      if (visited.count({start, first_to})) continue;
      std::vector<std::pair<int, int>> walk;
      int u = start, v = first_to;
      while (visited.insert({u, v}).second) {
        walk.emplace_back(u, v);
        const int w = successor(u, v);
        u = v;
        v = w;
      }
      std::vector<Point2> pts;
      for (const auto& h : walk) pts.push_back(g.vertices[h.first]);
      if (!(signed_area(pts) > 0.0)) continue;

      // Drop edges walked in both directions.
      std::set<std::pair<int, int>> directed(walk.begin(), walk.end());
      std::vector<std::pair<int, int>> kept;
      for (const auto& h : walk)
        if (!directed.count({h.second, h.first})) kept.push_back(h);
      bool simple = kept.size() >= 3;
      std::set<int> origins;
      for (std::size_t i = 0; simple && i < kept.size(); ++i) {
        simple = kept[i].second == kept[(i + 1) % kept.size()].first && origins.insert(kept[i].first).second;
      }
      if (!simple) continue;

      RoofPolygon poly;
      poly.instance_id = instance_id;
      for (const auto& h : kept) poly.ring.push_back(h.first);
      std::vector<Point2> ring = ring_points(poly, g.vertices);

      // Another cyclic component nested inside makes this a face with a hole.
      const auto own = uf.find(poly.ring.front());
      bool holed = false;
      for (int w = 0; w < n && !holed; ++w) {
        const auto root = uf.find(w);
        if (root == own) continue;
        const auto [cv, ce] = comp_size[root];
        if (ce < cv) continue;
        holed = locate(g.vertices[w], ring) == Containment::Inside;
      }
      if (holed) continue;

      std::rotate(poly.ring.begin(), std::min_element(poly.ring.begin(), poly.ring.end()), poly.ring.end());
      faces.push_back(std::move(poly));
    }
  }
  std::sort(faces.begin(), faces.end(), [](const RoofPolygon& a, const RoofPolygon& b) {
    return std::tie(a.instance_id, a.ring) < std::tie(b.instance_id, b.ring);
  });
  return faces;
}

/// GeoJSON FeatureCollection of polygons in world metres (pixel-unit frame
/// scaled by pixel_size), one Polygon feature per face.
inline nlohmann::ordered_json faces_to_geojson(const std::vector<RoofPolygon>& faces,
                                               const std::vector<Point2>& vertices, double pixel_size) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& f : faces) {
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    for (int v : f.ring) ring.push_back({vertices.at(v).x * pixel_size, vertices.at(v).y * pixel_size});
    if (!f.ring.empty()) ring.push_back(ring.front());
    nlohmann::ordered_json feat;
    feat["type"] = "Feature";
    feat["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
    feat["properties"] = {{"instance_id", f.instance_id}};
    fc["features"].push_back(std::move(feat));
  }
  return fc;
}

}  // namespace lod2vec
