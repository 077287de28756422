#pragma once

// Seeded synthetic scenes: ground-truth flat and gable buildings and the
// rasters the pipeline consumes (DSM, edge and corner probabilities, roof
// plane masks), plus controlled degradation.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lod2vec/geometry.hpp"
#include "lod2vec/metrics.hpp"
#include "lod2vec/raster.hpp"

namespace lod2vec {

enum class RoofType { Flat, Gable };

/// Geometry is kept in the pixel-unit frame (x = col, y = -row); multiply by
/// the scene pixel size for world metres.
struct SynthBuilding {
  int id = 0;
  RoofType roof = RoofType::Flat;
  double eave_m = 0.0;
  double ridge_m = 0.0;  // equals eave_m for flat roofs
  double rotation_deg = 0.0;
  std::vector<Point2> footprint;  // rectangle, CCW
  std::vector<Point2> corners;    // roof corners in outline order (gable adds the two ridge ends)
  std::vector<std::pair<int, int>> edges;  // roof edges as corner index pairs
};

struct SceneTruth {
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  double pixel_size = kDefaultPixelSize;
  double ground_m = 0.0;
  std::vector<SynthBuilding> buildings;
};

struct SceneParams {
  int n_buildings = 20;
  int width = 1024;
  int height = 1024;
  double pixel_size = kDefaultPixelSize;
  double min_short_px = 24.0;  // short side
  double max_short_px = 48.0;
  double max_aspect = 2.0;     // long / short
  double min_eave_m = 6.0;
  double max_eave_m = 20.0;
  double min_rise_m = 2.0;     // gable ridge above eave
  double max_rise_m = 6.0;
  double gable_fraction = 0.5;
  double ground_m = 35.0;
  double separation_px = 14.0;  // twice the rectangle buffer width
  double border_px = 12.0;
  bool rotate = true;           // multiples of 15 degrees
  int max_attempts = 200000;
};

namespace detail {

inline SynthBuilding make_building(int id, Point2 center, double long_side, double short_side, double angle_deg,
                                   RoofType roof, double eave, double ridge) {
  SynthBuilding b;
  b.id = id;
  b.roof = roof;
  b.eave_m = eave;
  b.ridge_m = roof == RoofType::Flat ? eave : ridge;
  b.rotation_deg = angle_deg;
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  auto place = [&](double u, double v) { return Point2{center.x + u * c - v * s, center.y + u * s + v * c}; };
  const double hu = long_side / 2.0, hv = short_side / 2.0;
  const Point2 a = place(-hu, -hv), bb = place(hu, -hv), cc = place(hu, hv), d = place(-hu, hv);
  b.footprint = {a, bb, cc, d};
  if (roof == RoofType::Flat) {
    b.corners = {a, bb, cc, d};
    b.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  } else {
    // Ridge along the long axis, ending at the midpoints of the short sides.
    const Point2 r2 = place(hu, 0.0), r1 = place(-hu, 0.0);
    b.corners = {a, bb, r2, cc, d, r1};
    b.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}, {2, 5}};
  }
  return b;
}

}  // namespace detail

/// Rejection-samples non-overlapping buildings. Separation is enforced on
/// circumscribed circles, so footprints are at least `separation_px` apart.
inline SceneTruth generate_scene(std::uint64_t seed, const SceneParams& p) {
  if (p.n_buildings < 0 || p.width <= 0 || p.height <= 0) throw Error("generate_scene: invalid dimensions");
  if (p.min_short_px <= 0 || p.max_short_px < p.min_short_px || p.max_aspect < 1.0)
    throw Error("generate_scene: invalid size range");
  SceneTruth t;
  t.seed = seed;
  t.width = p.width;
  t.height = p.height;
  t.pixel_size = p.pixel_size;
  t.ground_m = p.ground_m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  struct Disk {
    double x, y, r;
  };
  std::vector<Disk> placed;
  int attempts = 0;
  while (static_cast<int>(t.buildings.size()) < p.n_buildings) {
    if (++attempts > p.max_attempts)
      throw Error("generate_scene: could not place " + std::to_string(p.n_buildings) + " buildings after " +
                  std::to_string(p.max_attempts) + " attempts");
    const double short_side = std::round(uniform(p.min_short_px, p.max_short_px));
    const double long_side = std::round(uniform(short_side, short_side * p.max_aspect));
    const double angle = p.rotate ? 15.0 * static_cast<int>(unit(rng) * 12.0) : 0.0;
    const double radius = 0.5 * std::hypot(long_side, short_side);
    const double margin = radius + p.border_px;
    if (2 * margin >= p.width || 2 * margin >= p.height) throw Error("generate_scene: raster too small for buildings");
    const double cx = std::round(uniform(margin, p.width - margin));
    const double row = std::round(uniform(margin, p.height - margin));
    const bool gable = unit(rng) < p.gable_fraction;
    const double eave = uniform(p.min_eave_m, p.max_eave_m);
    const double rise = uniform(p.min_rise_m, p.max_rise_m);
    bool clear = true;
    for (const auto& d : placed)
      if (std::hypot(d.x - cx, d.y + row) < d.r + radius + p.separation_px) {
        clear = false;
        break;
      }
    if (!clear) continue;
    placed.push_back({cx, -row, radius});
    t.buildings.push_back(detail::make_building(static_cast<int>(t.buildings.size()) + 1, {cx, -row}, long_side,
                                                short_side, angle, gable ? RoofType::Gable : RoofType::Flat, eave,
                                                eave + rise));
  }
  return t;
}

/// Scene with a single explicitly specified building.
inline SceneTruth single_building_scene(int width, int height, double pixel_size, double ground_m, Point2 center,
                                        double long_side, double short_side, double angle_deg, RoofType roof,
                                        double eave_m, double ridge_m) {
  SceneTruth t;
  t.width = width;
  t.height = height;
  t.pixel_size = pixel_size;
  t.ground_m = ground_m;
  t.buildings.push_back(detail::make_building(1, center, long_side, short_side, angle_deg, roof, eave_m, ridge_m));
  return t;
}

/// Calls fn(row, col) for every pixel the segment a-b passes through
/// (pixel (r, c) covers [c-0.5, c+0.5] x [r-0.5, r+0.5]; points in the pixel-unit frame).
template <class Fn>
void walk_segment(Point2 a, Point2 b, Fn&& fn) {
  const double x0 = a.x, y0 = -a.y, x1 = b.x, y1 = -b.y;  // (col, row)
  int x = static_cast<int>(std::floor(x0 + 0.5)), y = static_cast<int>(std::floor(y0 + 0.5));
  const int ex = static_cast<int>(std::floor(x1 + 0.5)), ey = static_cast<int>(std::floor(y1 + 0.5));
  const double dx = x1 - x0, dy = y1 - y0;
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0), sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double tmx = sx ? ((x + 0.5 * sx) - x0) / dx : inf;
  double tmy = sy ? ((y + 0.5 * sy) - y0) / dy : inf;
  const double tdx = sx ? 1.0 / std::abs(dx) : inf, tdy = sy ? 1.0 / std::abs(dy) : inf;
  const int max_steps = std::abs(ex - x) + std::abs(ey - y) + 1;
  for (int step = 0; step <= max_steps; ++step) {
    fn(y, x);
    if (x == ex && y == ey) break;
    if (tmx < tmy) {
      x += sx;
      tmx += tdx;
    } else if (tmy < tmx) {
      y += sy;
      tmy += tdy;
    } else {
      // Exactly through a pixel corner: the side pixels are only touched.
      x += sx;
      y += sy;
      tmx += tdx;
      tmy += tdy;
    }
  }
}

struct SceneRasters {
  Raster dsm;
  Raster edge_prob;
  Raster corner_prob;
  RoofMask truth_masks;
};

inline Pixel corner_pixel(Point2 p) {
  return {static_cast<int>(std::floor(-p.y + 0.5)), static_cast<int>(std::floor(p.x + 0.5))};
}

/// Renders the scene. DSM = ground + roof height on pixels whose centre lies
/// in a footprint (gable: linear from eave at the long sides to ridge at the
/// axis); edges are 1-pixel line walks; corners are single pixels; each roof
/// plane gets its own mask label.
inline SceneRasters rasterize_truth(const SceneTruth& t) {
  SceneRasters out;
  out.dsm = Raster(t.width, t.height, t.pixel_size, kDefaultNodata, static_cast<float>(t.ground_m));
  out.edge_prob = Raster(t.width, t.height, t.pixel_size);
  out.corner_prob = Raster(t.width, t.height, t.pixel_size);
  out.truth_masks.width = t.width;
  out.truth_masks.height = t.height;
  out.truth_masks.labels.assign(static_cast<std::size_t>(t.width) * t.height, 0);

  for (const auto& b : t.buildings) {
    const double th = b.rotation_deg * std::numbers::pi / 180.0;
    const Point2 axis{std::cos(th), std::sin(th)};
    const Point2 normal{-axis.y, axis.x};
    Point2 center{0, 0};
    for (const auto& p : b.footprint) center = center + 0.25 * p;
    const double half_short = std::abs(dot(b.footprint[3] - b.footprint[0], normal)) / 2.0;
    const int flat_label = ++out.truth_masks.n_planes;
    const int second_label = b.roof == RoofType::Gable ? ++out.truth_masks.n_planes : 0;

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : b.footprint) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const int r0 = std::max(0, static_cast<int>(std::floor(-y1))), r1 = std::min(t.height - 1, static_cast<int>(std::ceil(-y0)));
    const int c0 = std::max(0, static_cast<int>(std::floor(x0))), c1 = std::min(t.width - 1, static_cast<int>(std::ceil(x1)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const Point2 q{double(c), -double(r)};
        if (locate(q, b.footprint) == Containment::Outside) continue;
        double h = b.eave_m;
        const std::size_t i = out.dsm.index(r, c);
        if (b.roof == RoofType::Gable) {
          const double d = dot(q - center, normal);
          h = b.eave_m + (b.ridge_m - b.eave_m) * std::max(0.0, 1.0 - std::abs(d) / half_short);
          out.truth_masks.labels[i] = d > 0 ? second_label : (d < 0 ? flat_label : 0);
        } else {
          out.truth_masks.labels[i] = flat_label;
        }
        out.dsm.values()[i] = static_cast<float>(t.ground_m + h);
      }
    for (const auto& [i, j] : b.edges)
      walk_segment(b.corners[i], b.corners[j], [&](int r, int c) {
        if (out.edge_prob.contains(r, c)) out.edge_prob(r, c) = 1.0f;
      });
    for (const auto& p : b.corners) {
      const Pixel px = corner_pixel(p);
      if (out.corner_prob.contains(px)) out.corner_prob(px.row, px.col) = 1.0f;
    }
  }
  return out;
}

struct DegradeParams {
  double dsm_noise_sigma = 0.0;   // metres, Gaussian
  double edge_dropout = 0.0;      // probability of zeroing each lit edge pixel
  int corner_jitter = 0;          // max displacement per axis, pixels
  double dsm_quantization = 0.0;  // metres; 0 = none
  std::uint64_t seed = 0;
};

/// Seeded degradation. Each effect draws from its own stream, so disabling
/// one leaves the others unchanged; all-zero parameters return the input.
inline SceneRasters degrade(const SceneRasters& in, const DegradeParams& p) {
  SceneRasters out = in;
  if (p.dsm_noise_sigma > 0.0) {
    std::mt19937_64 rng(p.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> noise(0.0, p.dsm_noise_sigma);
    for (auto& v : out.dsm.values())
      if (!out.dsm.is_nodata(v)) v = static_cast<float>(v + noise(rng));
  }
  if (p.dsm_quantization > 0.0) {
    for (auto& v : out.dsm.values())
      if (!out.dsm.is_nodata(v)) v = static_cast<float>(std::round(v / p.dsm_quantization) * p.dsm_quantization);
  }
  if (p.edge_dropout > 0.0) {
    std::mt19937_64 rng(p.seed ^ 0xbf58476d1ce4e5b9ull);
    std::bernoulli_distribution drop(p.edge_dropout);
    for (auto& v : out.edge_prob.values())
      if (v > 0.0f && drop(rng)) v = 0.0f;
  }
  if (p.corner_jitter > 0) {
    std::mt19937_64 rng(p.seed ^ 0x94d049bb133111ebull);
    std::uniform_int_distribution<int> off(-p.corner_jitter, p.corner_jitter);
    Raster moved = Raster::like(in.corner_prob);
    for (int r = 0; r < in.corner_prob.height(); ++r)
      for (int c = 0; c < in.corner_prob.width(); ++c) {
        const float v = in.corner_prob(r, c);
        if (!(v > 0.0f)) continue;
        const int dr = off(rng), dc = off(rng);
        const int nr = std::clamp(r + dr, 0, moved.height() - 1);
        const int nc = std::clamp(c + dc, 0, moved.width() - 1);
        moved(nr, nc) = std::max(moved(nr, nc), v);
      }
    out.corner_prob = std::move(moved);
  }
  return out;
}

/// Footprints in world metres, one ring each.
inline std::vector<FootprintRings> truth_footprints(const SceneTruth& t) {
  std::vector<FootprintRings> out;
  for (const auto& b : t.buildings) {
    std::vector<Point2> ring;
    for (const auto& p : b.footprint) ring.push_back(t.pixel_size * p);
    out.push_back({ring});
  }
  return out;
}

inline nlohmann::ordered_json scene_to_json(const SceneTruth& t) {
  auto pts = [&](const std::vector<Point2>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& p : v) a.push_back({p.x * t.pixel_size, p.y * t.pixel_size});
    return a;
  };
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = t.seed;
  j["width"] = t.width;
  j["height"] = t.height;
  j["pixel_size"] = t.pixel_size;
  j["ground_m"] = t.ground_m;
  j["buildings"] = nlohmann::ordered_json::array();
  for (const auto& b : t.buildings) {
    nlohmann::ordered_json bj;
    bj["id"] = b.id;
    bj["roof"] = b.roof == RoofType::Flat ? "flat" : "gable";
    bj["eave_m"] = b.eave_m;
    bj["ridge_m"] = b.ridge_m;
    bj["rotation_deg"] = b.rotation_deg;
    bj["footprint"] = pts(b.footprint);
    bj["corners"] = pts(b.corners);
    bj["edges"] = nlohmann::ordered_json::array();
    for (const auto& [a, c] : b.edges) bj["edges"].push_back({a, c});
    j["buildings"].push_back(std::move(bj));
  }
  return j;
}

inline SceneTruth scene_from_json(const nlohmann::json& j) {
  SceneTruth t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.width = j.at("width").get<int>();
  t.height = j.at("height").get<int>();
  t.pixel_size = j.at("pixel_size").get<double>();
  t.ground_m = j.at("ground_m").get<double>();
  auto pts = [&](const nlohmann::json& a) {
    std::vector<Point2> v;
    for (const auto& p : a) v.push_back({p.at(0).get<double>() / t.pixel_size, p.at(1).get<double>() / t.pixel_size});
    return v;
  };
  for (const auto& bj : j.at("buildings")) {
    SynthBuilding b;
    b.id = bj.at("id").get<int>();
    b.roof = bj.at("roof").get<std::string>() == "gable" ? RoofType::Gable : RoofType::Flat;
    b.eave_m = bj.at("eave_m").get<double>();
    b.ridge_m = bj.at("ridge_m").get<double>();
    b.rotation_deg = bj.at("rotation_deg").get<double>();
    b.footprint = pts(bj.at("footprint"));
    b.corners = pts(bj.at("corners"));
    for (const auto& e : bj.at("edges")) b.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    t.buildings.push_back(std::move(b));
  }
  return t;
}

}  // namespace lod2vec
