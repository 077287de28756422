#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "lod2vec/synth.hpp"
#include "support.hpp"

using namespace lod2vec;
using testing_support::Gen;

namespace {

std::set<Pixel> walk(Point2 a, Point2 b) {
  std::set<Pixel> s;
  walk_segment(a, b, [&](int r, int c) { s.insert({r, c}); });
  return s;
}

// Oracle: does segment ab meet the closed pixel square of (r, c)? Liang-Barsky clipping.
bool segment_meets_pixel(Point2 a, Point2 b, int r, int c) {
  const double x0 = a.x, y0 = -a.y, dx = b.x - a.x, dy = -(b.y - a.y);
  double t0 = 0, t1 = 1;
  auto clip = [&](double p, double q) {
    if (p == 0) return q >= 0;
    const double t = q / p;
    if (p < 0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    return t0 <= t1;
  };
  return clip(-dx, x0 - (c - 0.5)) && clip(dx, (c + 0.5) - x0) && clip(-dy, y0 - (r - 0.5)) &&
         clip(dy, (r + 0.5) - y0);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 u = b - a;
  const double t = std::clamp(dot(p - a, u) / dot(u, u), 0.0, 1.0);
  return norm(p - (a + t * u));
}

double polygon_distance(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double d = 1e300;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Point2 a0 = a[i], a1 = a[(i + 1) % a.size()], b0 = b[j], b1 = b[(j + 1) % b.size()];
      if (segments_intersect(a0, a1, b0, b1)) return 0.0;
      d = std::min({d, point_segment_distance(a0, b0, b1), point_segment_distance(b0, a0, a1)});
    }
  return d;
}

}  // namespace

TEST(Synth, SameSeedSameScene) {
  SceneParams p;
  const auto a = scene_to_json(generate_scene(5, p)).dump();
  EXPECT_EQ(a, scene_to_json(generate_scene(5, p)).dump());
  EXPECT_NE(a, scene_to_json(generate_scene(6, p)).dump());
}

TEST(Synth, EmptyScene) {
  SceneParams p;
  p.n_buildings = 0;
  const auto t = generate_scene(1, p);
  EXPECT_TRUE(t.buildings.empty());
  const auto r = rasterize_truth(t);
  for (float v : r.edge_prob.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Synth, FiftyBuildingsArePairwiseSeparated) {
  SceneParams p;
  p.width = p.height = 2048;
  p.n_buildings = 50;
  const auto t = generate_scene(3, p);
  ASSERT_EQ(t.buildings.size(), 50u);
  for (std::size_t i = 0; i < t.buildings.size(); ++i) {
    const auto& b = t.buildings[i];
    EXPECT_GT(signed_area(b.footprint), 0.0);
    for (const auto& q : b.footprint) {
      EXPECT_GE(q.x, p.border_px);
      EXPECT_LE(-q.y, p.height - p.border_px);
    }
    for (std::size_t j = i + 1; j < t.buildings.size(); ++j)
      ASSERT_GE(polygon_distance(b.footprint, t.buildings[j].footprint), p.separation_px);
  }
}

TEST(Synth, FlatRoofIsConstant) {
  const auto t = single_building_scene(40, 40, 0.5, 0.0, {20, -20}, 20, 20, 0.0, RoofType::Flat, 10.0, 10.0);
  const auto r = rasterize_truth(t);
  for (int row = 0; row < 40; ++row)
    for (int col = 0; col < 40; ++col) {
      const bool inside = row >= 10 && row <= 30 && col >= 10 && col <= 30;
      EXPECT_EQ(r.dsm(row, col), inside ? 10.0f : 0.0f);
      EXPECT_EQ(r.truth_masks.labels[r.dsm.index(row, col)], inside ? 1 : 0);
    }
  EXPECT_EQ(r.truth_masks.n_planes, 1);
}

TEST(Synth, GableHeightsAreLinearBetweenEaveAndRidge) {
  const auto t = single_building_scene(60, 40, 0.5, 2.0, {30, -20}, 40, 24, 0.0, RoofType::Gable, 11.0, 15.0);
  const auto r = rasterize_truth(t);
  for (int col = 10; col <= 50; ++col) {
    EXPECT_FLOAT_EQ(r.dsm(20, col), 17.0f);  // ridge
    EXPECT_FLOAT_EQ(r.dsm(8, col), 13.0f);   // eave
    EXPECT_FLOAT_EQ(r.dsm(32, col), 13.0f);
    for (int row = 8; row <= 32; ++row)
      EXPECT_NEAR(r.dsm(row, col), 2.0 + 11.0 + 4.0 * (1.0 - std::abs(row - 20) / 12.0), 1e-5);
  }
  EXPECT_EQ(r.truth_masks.n_planes, 2);
  EXPECT_NE(r.truth_masks.labels[r.dsm.index(10, 20)], r.truth_masks.labels[r.dsm.index(30, 20)]);
  EXPECT_EQ(r.truth_masks.labels[r.dsm.index(20, 20)], 0);
  const auto& b = t.buildings[0];
  EXPECT_EQ(b.corners.size(), 6u);
  EXPECT_EQ(b.edges.size(), 7u);
}

TEST(Synth, AxisAlignedEdgePixelCount) {
  const auto t = single_building_scene(60, 40, 0.5, 0.0, {30, -20}, 40, 24, 0.0, RoofType::Flat, 5.0, 5.0);
  const auto r = rasterize_truth(t);
  int lit = 0;
  for (float v : r.edge_prob.values()) lit += v > 0;
  EXPECT_EQ(lit, 2 * 40 + 2 * 24);
  int corners = 0;
  for (float v : r.corner_prob.values()) corners += v > 0;
  EXPECT_EQ(corners, 4);
}

TEST(Synth, EdgePixelsWithinLineWalkBounds) {
  SceneParams p;
  p.width = p.height = 512;
  p.n_buildings = 10;
  const auto t = generate_scene(8, p);
  const auto r = rasterize_truth(t);
  std::set<Pixel> all;
  long lower = 0, upper = 0;
  for (const auto& b : t.buildings)
    for (const auto& [i, j] : b.edges) {
      const Point2 a = b.corners[i], c = b.corners[j];
      const auto s = walk(a, c);
      all.insert(s.begin(), s.end());
      // Bresenham count <= supercover count <= |dx| + |dy| + 1 (in pixels crossed).
      const int dx = std::abs(corner_pixel(a).col - corner_pixel(c).col);
      const int dy = std::abs(corner_pixel(a).row - corner_pixel(c).row);
      EXPECT_GE(static_cast<int>(s.size()), std::max(dx, dy) + 1);
      EXPECT_LE(static_cast<int>(s.size()), dx + dy + 1);
      lower += std::max(dx, dy) + 1;
      upper += dx + dy + 1;
    }
  long lit = 0;
  for (float v : r.edge_prob.values()) lit += v > 0;
  EXPECT_EQ(lit, static_cast<long>(all.size()));
  EXPECT_LE(lit, upper);
}

TEST(WalkSegment, CoversExactlyThePixelsTheSegmentMeets) {
  Gen g(0x1a1c);
  for (int trial = 0; trial < 1000; ++trial) {
    const Point2 a{g.real(0, 20), -g.real(0, 20)};
    Point2 b{g.real(0, 20), -g.real(0, 20)};
    if (trial % 4 == 0) b.y = a.y;  // axis-parallel cases
    if (trial % 4 == 1) b.x = a.x;
    const auto s = walk(a, b);
    for (const auto& px : s) ASSERT_TRUE(segment_meets_pixel(a, b, px.row, px.col)) << "trial " << trial;
    for (int k = 0; k <= 400; ++k) {
      const Point2 q = a + (k / 400.0) * (b - a);
      ASSERT_TRUE(s.count(corner_pixel(q))) << "trial " << trial;
    }
  }
}

TEST(Degrade, ZeroParametersAreIdentity) {
  const auto r = rasterize_truth(generate_scene(4, SceneParams{}));
  const auto d = degrade(r, DegradeParams{});
  EXPECT_TRUE(std::equal(d.dsm.values().begin(), d.dsm.values().end(), r.dsm.values().begin()));
  EXPECT_TRUE(std::equal(d.edge_prob.values().begin(), d.edge_prob.values().end(), r.edge_prob.values().begin()));
  EXPECT_TRUE(
      std::equal(d.corner_prob.values().begin(), d.corner_prob.values().end(), r.corner_prob.values().begin()));
}

TEST(Degrade, DropoutKeepsAboutEightyPercentReproducibly) {
  SceneRasters s;
  s.dsm = Raster(100, 100);
  s.corner_prob = Raster(100, 100);
  s.edge_prob = Raster(100, 100);
  for (int i = 0; i < 1000; ++i) s.edge_prob.values()[i * 10] = 1.0f;
  DegradeParams p;
  p.edge_dropout = 0.2;
  p.seed = 11;
  auto count = [](const Raster& r) {
    int n = 0;
    for (float v : r.values()) n += v > 0;
    return n;
  };
  const int kept = count(degrade(s, p).edge_prob);
  EXPECT_EQ(kept, count(degrade(s, p).edge_prob));
  EXPECT_NEAR(kept, 800, 4 * std::sqrt(1000 * 0.2 * 0.8));
  // Only lit pixels change, and only to zero.
  const auto d = degrade(s, p);
  for (std::size_t i = 0; i < s.edge_prob.size(); ++i) {
    const float before = s.edge_prob.values()[i], after = d.edge_prob.values()[i];
    ASSERT_TRUE(after == before || after == 0.0f) << "pixel " << i;
  }
}

TEST(Degrade, NoiseHasRequestedSigma) {
  SceneRasters s;
  s.dsm = Raster(400, 250, 0.5, kDefaultNodata, 30.0f);
  s.edge_prob = Raster(400, 250);
  s.corner_prob = Raster(400, 250);
  DegradeParams p;
  p.dsm_noise_sigma = 0.5;
  p.seed = 3;
  const auto d = degrade(s, p);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < d.dsm.size(); ++i) {
    const double e = double(d.dsm.values()[i]) - 30.0;
    sum += e;
    sq += e * e;
  }
  const double n = static_cast<double>(d.dsm.size());
  const double sigma = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sigma, 0.5, 0.025);
  // Edge and corner rasters untouched.
  EXPECT_TRUE(std::equal(d.edge_prob.values().begin(), d.edge_prob.values().end(), s.edge_prob.values().begin()));
}

TEST(Degrade, QuantizationAndJitter) {
  const auto r = rasterize_truth(generate_scene(12, SceneParams{}));
  DegradeParams p;
  p.dsm_quantization = 0.25;
  p.corner_jitter = 1;
  p.seed = 5;
  const auto d = degrade(r, p);
  for (float v : d.dsm.values()) ASSERT_EQ(std::fmod(double(v), 0.25), 0.0);
  std::vector<Pixel> before, after;
  for (int row = 0; row < r.corner_prob.height(); ++row)
    for (int col = 0; col < r.corner_prob.width(); ++col) {
      if (r.corner_prob(row, col) > 0) before.push_back({row, col});
      if (d.corner_prob(row, col) > 0) after.push_back({row, col});
    }
  ASSERT_EQ(before.size(), after.size());
  for (const Pixel& a : after) {
    bool near = false;
    for (const Pixel& b : before) near |= std::abs(a.row - b.row) <= 1 && std::abs(a.col - b.col) <= 1;
    ASSERT_TRUE(near);
  }
  EXPECT_TRUE(std::equal(d.edge_prob.values().begin(), d.edge_prob.values().end(), r.edge_prob.values().begin()));
}

TEST(Synth, TruthJsonRoundTrip) {
  const auto t = generate_scene(21, SceneParams{});
  const auto back = scene_from_json(nlohmann::json::parse(scene_to_json(t).dump()));
  EXPECT_EQ(scene_to_json(back).dump(), scene_to_json(t).dump());
  EXPECT_EQ(truth_footprints(t).size(), t.buildings.size());
}
