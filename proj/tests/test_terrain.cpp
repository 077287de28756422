#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lod2vec/morphology.hpp"
#include "lod2vec/terrain.hpp"
#include "support.hpp"

using namespace lod2vec;
using testing_support::Gen;

namespace {

// Oracle: windowed min/max by direct scan, ignoring nodata.
Raster brute_filter(const Raster& in, int half, bool want_max) {
  Raster out = Raster::like(in);
  for (int r = 0; r < in.height(); ++r)
    for (int c = 0; c < in.width(); ++c) {
      bool any = false;
      float best = 0.0f;
      for (int y = std::max(0, r - half); y <= std::min(in.height() - 1, r + half); ++y)
        for (int x = std::max(0, c - half); x <= std::min(in.width() - 1, c + half); ++x) {
          const float v = in(y, x);
          if (in.is_nodata(v)) continue;
          if (!any || (want_max ? v > best : v < best)) best = v;
          any = true;
        }
      out(r, c) = any ? best : in.nodata();
    }
  return out;
}

Raster brute_opening(const Raster& in, int half) { return brute_filter(brute_filter(in, half, false), half, true); }

void expect_same(const Raster& a, const Raster& b) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.values()[i], b.values()[i]) << "pixel " << i;
}

Raster box_scene(int size, int box, float ground, float roof) {
  Raster r(size, size, kDefaultPixelSize, kDefaultNodata, ground);
  const int o = (size - box) / 2;
  for (int y = o; y < o + box; ++y)
    for (int x = o; x < o + box; ++x) r(y, x) = roof;
  return r;
}

// Oracle normal from world-frame finite differences: x east (col), y north (-row).
Normal fd_normal(const Raster& z, int r, int c, double ps) {
  auto at = [&](int rr, int cc) { return static_cast<double>(z(rr, cc)); };
  double gx, gy;
  if (c == 0) gx = (at(r, 1) - at(r, 0)) / ps;
  else if (c == z.width() - 1) gx = (at(r, c) - at(r, c - 1)) / ps;
  else gx = (at(r, c + 1) - at(r, c - 1)) / (2 * ps);
  // y increases northwards, i.e. towards row - 1.
  if (r == 0) gy = (at(0, c) - at(1, c)) / ps;
  else if (r == z.height() - 1) gy = (at(r - 1, c) - at(r, c)) / ps;
  else gy = (at(r - 1, c) - at(r + 1, c)) / (2 * ps);
  const double n = std::sqrt(gx * gx + gy * gy + 1);
  return {-gx / n, -gy / n, 1 / n};
}

}  // namespace

TEST(Morphology, ErodeDilateOpeningMatchBruteForce) {
  Gen g(0x70e0);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = g.integer(1, 24), h = g.integer(1, 24), half = g.integer(0, 6);
    const Raster r = testing_support::random_raster(g, w, h, 0.0f, 50.0f, trial % 2 ? 8 : 0, 0.1);
    SCOPED_TRACE("trial " + std::to_string(trial));
    expect_same(erode(r, half), brute_filter(r, half, false));
    expect_same(dilate(r, half), brute_filter(r, half, true));
    expect_same(opening(r, half), brute_opening(r, half));
  }
}

TEST(Ndsm, FlatGroundGivesZero) {
  const Raster flat(40, 30, kDefaultPixelSize, kDefaultNodata, 100.0f);
  const Raster n = generate_ndsm(flat, 10);
  for (float v : n.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Ndsm, BoxNarrowerThanElementIsRecovered) {
  const Raster dsm = box_scene(80, 20, 100.0f, 110.0f);
  const Raster n = generate_ndsm(dsm, 30);
  const Raster oracle = ndsm_from_ground(dsm, brute_opening(dsm, 30));
  expect_same(n, oracle);
  for (int r = 0; r < 80; ++r)
    for (int c = 0; c < 80; ++c) {
      const bool in_box = r >= 30 && r < 50 && c >= 30 && c < 50;
      EXPECT_EQ(n(r, c), in_box ? 10.0f : 0.0f);
    }
}

TEST(Ndsm, BuildingWiderThanElementLeaksIntoGround) {
  const Raster dsm = box_scene(140, 100, 100.0f, 110.0f);
  const Raster n = generate_ndsm(dsm, 30);
  expect_same(n, ndsm_from_ground(dsm, brute_opening(dsm, 30)));
  EXPECT_LT(n(70, 70), 10.0f);
}

TEST(Ndsm, NonNegativeAndTranslationInvariant) {
  Gen g(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Raster r = testing_support::random_raster(g, g.integer(3, 30), g.integer(3, 30), 0.0f, 32.0f, 128);
    const int half = g.integer(1, 5);
    const Raster n = generate_ndsm(r, half);
    for (float v : n.values()) ASSERT_GE(v, 0.0f);
    Raster shifted = r;
    for (auto& v : shifted.values()) v += 64.0f;  // exact in float for quarter steps
    expect_same(generate_ndsm(shifted, half), n);
  }
}

TEST(Ndsm, RejectsNonPositiveElement) { EXPECT_THROW(generate_ndsm(Raster(3, 3), 0), Error); }

TEST(Normals, FlatAndTiltedPlanes) {
  const Raster flat(5, 5, 1.0, kDefaultNodata, 3.0f);
  const auto nf = compute_normals(flat, 1.0);
  Raster tilt(6, 5, 1.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) tilt(r, c) = static_cast<float>(c);  // z = x
  const auto nt = compute_normals(tilt, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      EXPECT_EQ(nf.at(r, c).z, 1.0);
      EXPECT_NEAR(nt.at(r, c).x, -s, 1e-12);
      EXPECT_NEAR(nt.at(r, c).y, 0.0, 1e-12);
      EXPECT_NEAR(nt.at(r, c).z, s, 1e-12);
    }
}

TEST(Normals, RandomRasterMatchesFiniteDifferenceOracle) {
  Gen g(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double ps = g.real(0.25, 2.0);
    const Raster z = testing_support::random_raster(g, 5, 5, -3.0f, 3.0f);
    const auto f = compute_normals(z, ps);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        const Normal o = fd_normal(z, r, c, ps);
        const Normal& n = f.at(r, c);
        ASSERT_NEAR(n.x, o.x, 1e-6);
        ASSERT_NEAR(n.y, o.y, 1e-6);
        ASSERT_NEAR(n.z, o.z, 1e-6);
        ASSERT_NEAR(std::hypot(n.x, n.y, n.z), 1.0, 1e-12);
      }
  }
}

TEST(Normals, HeightScalingScalesGradient) {
  Gen g(11);
  const Raster z = testing_support::random_raster(g, 7, 6, 0.0f, 4.0f, 16);
  const double s = 2.0;
  Raster scaled = z;
  for (auto& v : scaled.values()) v = static_cast<float>(v * s);
  const auto a = compute_normals(z, 0.5), b = compute_normals(scaled, 0.5);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 7; ++c) {
      const Normal& n = a.at(r, c);
      // n = (-gx, -gy, 1)/|.|, so the gradient is (-n.x/n.z, -n.y/n.z).
      const double gx = -n.x / n.z * s, gy = -n.y / n.z * s, len = std::sqrt(gx * gx + gy * gy + 1);
      EXPECT_NEAR(b.at(r, c).x, -gx / len, 1e-9);
      EXPECT_NEAR(b.at(r, c).y, -gy / len, 1e-9);
    }
}

TEST(Normals, NodataNeighboursFallBackToOneSided) {
  Raster z(5, 4, 1.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) z(r, c) = static_cast<float>(2 * c);
  z(1, 2) = kDefaultNodata;
  const auto f = compute_normals(z, 1.0);
  EXPECT_FALSE(f.is_valid(1, 2));
  const double s = 1.0 / std::sqrt(5.0);
  EXPECT_NEAR(f.at(1, 1).x, -2 * s, 1e-12);  // only the west neighbour remains
  EXPECT_NEAR(f.at(1, 3).x, -2 * s, 1e-12);  // only the east neighbour remains
  EXPECT_NEAR(f.at(1, 0).x, -2 * s, 1e-12);  // border: one-sided by construction
}

TEST(NormalAngles, IdentityAndFortyFiveDegrees) {
  Gen g(3);
  const Raster a = testing_support::random_raster(g, 6, 6, 0.0f, 2.0f);
  const auto same = normal_angle_stats(a, a);
  EXPECT_EQ(same.mean_deg, 0.0);
  Raster flat(6, 6, 1.0), tilt(6, 6, 1.0);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) tilt(r, c) = static_cast<float>(c);
  const auto s = normal_angle_stats(flat, tilt);
  EXPECT_NEAR(s.mean_deg, 45.0, 1e-9);
  EXPECT_NEAR(s.median_deg, 45.0, 1e-9);
  EXPECT_EQ(s.n, 36u);
}

TEST(NormalAngles, MatchesArccosOracle) {
  Gen g(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Raster a = testing_support::random_raster(g, 5, 4, 0.0f, 3.0f);
    const Raster b = testing_support::random_raster(g, 5, 4, 0.0f, 3.0f);
    const auto s = normal_angle_stats(a, b);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 5; ++c) {
        const Normal p = fd_normal(a, r, c, a.pixel_size()), q = fd_normal(b, r, c, b.pixel_size());
        const double rad = std::acos(std::clamp(p.x * q.x + p.y * q.y + p.z * q.z, -1.0, 1.0));
        ASSERT_NEAR(s.angles_deg(r, c) * std::numbers::pi / 180.0, rad, 1e-6);
      }
  }
  EXPECT_THROW(normal_angle_stats(Raster(3, 3), Raster(4, 3)), Error);
}
