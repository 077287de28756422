#pragma once

// LoD-2 building assembly: footprint union, corner heights, roof/wall/ground
// mesh, and OBJ / GeoJSON export.

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lod2vec/face_extract.hpp"
#include "lod2vec/geometry.hpp"
#include "lod2vec/raster.hpp"

namespace lod2vec {

/// Outline of the union of one building's roof faces. Rings are vertex
/// indices; outer rings run counter-clockwise, holes clockwise.
struct Footprint {
  std::vector<std::vector<int>> outers;
  std::vector<std::vector<int>> holes;
};

/// Boundary of the union: edges used by exactly one roof, chained into rings.
inline Footprint footprint_union(const std::vector<RoofPolygon>& roofs, const std::vector<Point2>& vertices) {
  std::map<std::pair<int, int>, int> uses;  // undirected edge -> count
  std::vector<std::pair<int, int>> directed;
  for (const auto& r : roofs) {
    const std::size_t n = r.ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = r.ring[i], b = r.ring[(i + 1) % n];
      directed.emplace_back(a, b);
      if (++uses[std::minmax(a, b)] > 2) throw Error("footprint_union: edge shared by more than two roofs");
    }
  }
  std::vector<std::pair<int, int>> boundary;
  for (const auto& e : directed)
    if (uses[std::minmax(e.first, e.second)] == 1) boundary.push_back(e);

  // Roofs must meet along whole edges: a boundary edge may not overlap another.
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const Point2 a = vertices.at(boundary[i].first), b = vertices.at(boundary[i].second);
    for (std::size_t j = i + 1; j < boundary.size(); ++j) {
      const Point2 c = vertices.at(boundary[j].first), d = vertices.at(boundary[j].second);
      if (orient(a, b, c) != 0.0 || orient(a, b, d) != 0.0) continue;
      const Point2 u = b - a;
      const double len2 = dot(u, u);
      double t0 = dot(c - a, u) / len2, t1 = dot(d - a, u) / len2;
      if (t0 > t1) std::swap(t0, t1);
      if (std::min(1.0, t1) - std::max(0.0, t0) > 1e-12)
        throw Error("footprint_union: roofs overlap along a partial edge");
    }
  }

  // Chain. At a vertex with several outgoing boundary edges take the one
  // immediately clockwise of the incoming direction, which splits pinches.
  std::multimap<int, int> out_edges(boundary.begin(), boundary.end());
  std::set<std::pair<int, int>> used;
  Footprint fp;
  std::sort(boundary.begin(), boundary.end());
  for (const auto& start : boundary) {
    if (used.count(start)) continue;
    std::vector<int> ring;
    std::pair<int, int> cur = start;
    while (used.insert(cur).second) {
      ring.push_back(cur.first);
      const int v = cur.second;
      const Point2 back = vertices.at(cur.first) - vertices.at(v);
      const double back_angle = std::atan2(back.y, back.x);
      int best = -1;
      double best_turn = 0.0;
      for (auto [it, end] = out_edges.equal_range(v); it != end; ++it) {
        const Point2 d = vertices.at(it->second) - vertices.at(v);
        // Clockwise sweep from the back direction.
        double turn = back_angle - std::atan2(d.y, d.x);
        while (turn <= 0.0) turn += 2.0 * std::numbers::pi;
        if (best < 0 || turn < best_turn) {
          best = it->second;
          best_turn = turn;
        }
      }
      if (best < 0) break;
      cur = {v, best};
    }
    if (ring.size() < 3 || cur != start) throw Error("footprint_union: boundary does not close");
    std::rotate(ring.begin(), std::min_element(ring.begin(), ring.end()), ring.end());
    std::vector<Point2> pts;
    for (int v : ring) pts.push_back(vertices.at(v));
    (signed_area(pts) > 0.0 ? fp.outers : fp.holes).push_back(std::move(ring));
  }
  std::sort(fp.outers.begin(), fp.outers.end());
  std::sort(fp.holes.begin(), fp.holes.end());
  return fp;
}

inline constexpr int kDefaultHeightWindowHalf = 2;

/// Roof-corner heights: maximum of the nDSM over the (2*half+1)^2 window
/// around each corner pixel. A window without valid data yields nodata.
inline std::vector<float> assign_heights(const Raster& ndsm, const std::vector<Pixel>& corners,
                                         int half = kDefaultHeightWindowHalf) {
  std::vector<float> z;
  z.reserve(corners.size());
  for (const Pixel& p : corners) {
    if (!ndsm.contains(p)) throw Error("assign_heights: corner outside raster");
    z.push_back(window_extremum(ndsm, {p, half}, Extremum::Max));
  }
  return z;
}

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct BuildingModel3D {
  int instance_id = 0;
  std::vector<Vec3> vertices;  // metres
  std::vector<std::vector<int>> roof_faces;
  std::vector<std::vector<int>> wall_faces;
  std::vector<std::vector<int>> ground_faces;
  std::vector<std::vector<Point2>> footprint;  // outer rings in world metres, CCW
  std::vector<std::string> warnings;

  double ridge_m = 0.0;  // max roof vertex height
  double eave_m = 0.0;   // min height of roof vertices on the outline

  std::size_t face_count() const { return roof_faces.size() + wall_faces.size() + ground_faces.size(); }
};

/// Lifts roof polygons to their corner heights and closes the solid with one
/// wall quad per outline edge and a downward-facing ground face.
/// `vertices` are in the pixel-unit frame; `heights` are indexed like them.
inline BuildingModel3D build_model(int instance_id, const std::vector<RoofPolygon>& roofs, const Footprint& footprint,
                                   const std::vector<Point2>& vertices, const std::vector<float>& heights,
                                   double pixel_size) {
  if (roofs.empty()) throw Error("build_model: no roof faces");
  if (footprint.outers.empty()) throw Error("build_model: empty footprint");
  if (heights.size() != vertices.size()) throw Error("build_model: one height per vertex required");
  for (const auto& r : roofs)
    if (!validate_polygon(r, vertices)) throw Error("build_model: invalid roof polygon");

  BuildingModel3D m;
  m.instance_id = instance_id;
  if (!footprint.holes.empty())
    m.warnings.push_back("footprint has " + std::to_string(footprint.holes.size()) + " hole(s); dropped");

  std::map<int, int> top, bottom;
  std::set<int> roof_vertices;
  for (const auto& r : roofs) roof_vertices.insert(r.ring.begin(), r.ring.end());
  for (int v : roof_vertices) {
    const double z = heights[v];
    if (!(z >= 0.0)) throw Error("build_model: negative or missing corner height");
    top[v] = static_cast<int>(m.vertices.size());
    m.vertices.push_back({vertices[v].x * pixel_size, vertices[v].y * pixel_size, z});
  }
  std::set<int> outline;
  for (const auto& ring : footprint.outers) outline.insert(ring.begin(), ring.end());
  for (int v : outline) {
    if (!top.count(v)) throw Error("build_model: footprint vertex not on any roof");
    bottom[v] = static_cast<int>(m.vertices.size());
    m.vertices.push_back({vertices[v].x * pixel_size, vertices[v].y * pixel_size, 0.0});
  }

  for (const auto& r : roofs) {
    std::vector<int> f;
    for (int v : r.ring) f.push_back(top[v]);
    m.roof_faces.push_back(std::move(f));
  }
  for (const auto& ring : footprint.outers) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = ring[i], b = ring[(i + 1) % n];
      m.wall_faces.push_back({bottom[a], bottom[b], top[b], top[a]});
    }
    std::vector<int> ground;
    for (auto it = ring.rbegin(); it != ring.rend(); ++it) ground.push_back(bottom[*it]);
    m.ground_faces.push_back(std::move(ground));

    std::vector<Point2> world;
    for (int v : ring) world.push_back({vertices[v].x * pixel_size, vertices[v].y * pixel_size});
    m.footprint.push_back(std::move(world));
  }

  m.ridge_m = 0.0;
  for (const auto& [v, idx] : top) m.ridge_m = std::max(m.ridge_m, m.vertices[idx].z);
  m.eave_m = m.ridge_m;
  for (int v : outline) m.eave_m = std::min(m.eave_m, m.vertices[top[v]].z);
  return m;
}

struct MeshCheck {
  bool closed = false;    // every undirected edge on exactly two faces
  bool oriented = false;  // every directed edge used once (consistent winding)
  int euler = 0;          // V - E + F over referenced vertices
  int components = 0;
};

inline MeshCheck check_mesh(const BuildingModel3D& m) {
  std::map<std::pair<int, int>, int> undirected;
  std::map<std::pair<int, int>, int> directed;
  std::set<int> used;
  std::size_t faces = 0;
  UnionFind uf(m.vertices.size());
  auto add = [&](const std::vector<int>& f) {
    ++faces;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int a = f[i], b = f[(i + 1) % f.size()];
      used.insert(a);
      ++undirected[std::minmax(a, b)];
      ++directed[{a, b}];
      uf.unite(a, b);
    }
  };
  for (const auto& f : m.roof_faces) add(f);
  for (const auto& f : m.wall_faces) add(f);
  for (const auto& f : m.ground_faces) add(f);
  MeshCheck c;
  c.closed = std::all_of(undirected.begin(), undirected.end(), [](const auto& e) { return e.second == 2; });
  c.oriented = std::all_of(directed.begin(), directed.end(), [](const auto& e) { return e.second == 1; });
  c.euler = static_cast<int>(used.size()) - static_cast<int>(undirected.size()) + static_cast<int>(faces);
  std::set<std::uint32_t> roots;
  for (int v : used) roots.insert(uf.find(v));
  c.components = static_cast<int>(roots.size());
  return c;
}

namespace detail {
inline std::string fmt_coord(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}
}  // namespace detail

/// Wavefront OBJ: one `o building_<id>` group per model in id order, global
/// 1-based vertex indices, faces as polygons wound counter-clockwise seen from outside.
/// `z_offset` (per model, optional) is added to every vertex height. No models
/// give an empty file.
inline std::string export_obj(const std::vector<BuildingModel3D>& models, const std::vector<double>& z_offset = {}) {
  std::vector<const BuildingModel3D*> order;
  for (const auto& m : models) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->instance_id < b->instance_id; });
  std::ostringstream s;
  if (!order.empty()) s << "# lod2vec LoD-2 building models\n";
  std::size_t base = 1;
  for (const BuildingModel3D* m : order) {
    const double dz = z_offset.empty() ? 0.0 : z_offset.at(static_cast<std::size_t>(m - models.data()));
    s << "o building_" << m->instance_id << '\n';
    for (const auto& v : m->vertices)
      s << "v " << detail::fmt_coord(v.x) << ' ' << detail::fmt_coord(v.y) << ' ' << detail::fmt_coord(v.z + dz)
        << '\n';
    auto faces = [&](const std::vector<std::vector<int>>& fs) {
      for (const auto& f : fs) {
        s << 'f';
        for (int i : f) s << ' ' << base + static_cast<std::size_t>(i);
        s << '\n';
      }
    };
    faces(m->roof_faces);
    faces(m->wall_faces);
    faces(m->ground_faces);
    base += m->vertices.size();
  }
  return s.str();
}

struct ObjMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;  // 0-based
  std::vector<std::string> objects;
};

/// Minimal reader for the subset written by export_obj (v, f, o records).
inline ObjMesh parse_obj(const std::string& text) {
  ObjMesh mesh;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw Error("parse_obj: bad vertex record");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> f;
      std::string tok;
      while (ls >> tok) f.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      mesh.faces.push_back(std::move(f));
    } else if (tag == "o") {
      std::string name;
      ls >> name;
      mesh.objects.push_back(name);
    }
  }
  return mesh;
}

/// FeatureCollection of footprints in world metres with per-building attributes.
inline std::string export_geojson(const std::vector<BuildingModel3D>& models, const std::vector<double>& z_offset = {}) {
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return models[a].instance_id < models[b].instance_id; });
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (std::size_t i : order) {
    const auto& m = models[i];
    const double dz = z_offset.empty() ? 0.0 : z_offset.at(i);
    nlohmann::ordered_json polys = nlohmann::ordered_json::array();
    for (const auto& ring : m.footprint) {
      nlohmann::ordered_json coords = nlohmann::ordered_json::array();
      for (const auto& p : ring) coords.push_back({p.x, p.y});
      if (!ring.empty()) coords.push_back({ring.front().x, ring.front().y});
      polys.push_back(nlohmann::ordered_json::array({coords}));
    }
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    if (polys.size() == 1) f["geometry"] = {{"type", "Polygon"}, {"coordinates", polys[0]}};
    else f["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", polys}};
    f["properties"] = {{"instance_id", m.instance_id},
                       {"ridge_m", m.ridge_m + dz},
                       {"eave_m", m.eave_m + dz},
                       {"n_roof_faces", m.roof_faces.size()}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(2) + "\n";
}

/// Footprints (outer rings, world metres) read back from export_geojson output.
inline std::vector<std::vector<std::vector<Point2>>> read_footprints_geojson(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<std::vector<std::vector<Point2>>> out;
  for (const auto& f : j.at("features")) {
    const auto& g = f.at("geometry");
    std::vector<std::vector<Point2>> rings;
    auto ring_of = [](const nlohmann::json& coords) {
      std::vector<Point2> r;
      for (const auto& p : coords) r.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (r.size() > 1 && r.front() == r.back()) r.pop_back();
      return r;
    };
    if (g.at("type") == "Polygon") {
      rings.push_back(ring_of(g.at("coordinates").at(0)));
    } else if (g.at("type") == "MultiPolygon") {
      for (const auto& poly : g.at("coordinates")) rings.push_back(ring_of(poly.at(0)));
    } else {
      throw Error("unsupported GeoJSON geometry type");
    }
    out.push_back(std::move(rings));
  }
  return out;
}

}  // namespace lod2vec
