#pragma once

// nDSM generation, per-pixel surface normals, and normal-angle comparison.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lod2vec/morphology.hpp"
#include "lod2vec/raster.hpp"
#include "lod2vec/stats.hpp"

namespace lod2vec {

inline constexpr int kDefaultNdsmSeHalf = 100;

/// Ground surface estimate: grayscale opening with a square element.
inline Raster estimate_ground(const Raster& dsm, int se_half = kDefaultNdsmSeHalf) {
  if (se_half < 1) throw Error("generate_ndsm: se_half must be >= 1");
  return opening(dsm, se_half);
}

/// nDSM = DSM minus its opening, clamped at 0. Nodata is preserved.
inline Raster ndsm_from_ground(const Raster& dsm, const Raster& ground) {
  Raster out = Raster::like(dsm);
  const auto d = dsm.values();
  const auto g = ground.values();
  auto o = out.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (dsm.is_nodata(d[i]) || ground.is_nodata(g[i])) {
      o[i] = dsm.nodata();
    } else {
      o[i] = std::max(0.0f, d[i] - g[i]);
    }
  }
  return out;
}

inline Raster generate_ndsm(const Raster& dsm, int se_half = kDefaultNdsmSeHalf) {
  return ndsm_from_ground(dsm, estimate_ground(dsm, se_half));
}

struct Normal {
  double x = 0.0, y = 0.0, z = 1.0;
};

/// Per-pixel upward unit normals; `valid` is 0 where the normal is undefined.
struct NormalField {
  int width = 0;
  int height = 0;
  std::vector<Normal> normals;
  std::vector<unsigned char> valid;

  const Normal& at(int row, int col) const { return normals[static_cast<std::size_t>(row) * width + col]; }
  bool is_valid(int row, int col) const { return valid[static_cast<std::size_t>(row) * width + col] != 0; }
};

/// Normals of z = dsm(x, y) with x = col * pixel_size, y = -row * pixel_size:
/// n = normalize(-dz/dx, -dz/dy, 1). Central differences in the interior,
/// one-sided where a neighbour is missing (border or nodata).
inline NormalField compute_normals(const Raster& dsm, double pixel_size) {
  if (dsm.width() < 3 || dsm.height() < 3) throw Error("compute_normals: raster must be at least 3x3");
  if (!(pixel_size > 0.0)) throw Error("compute_normals: pixel_size must be positive");
  NormalField f;
  f.width = dsm.width();
  f.height = dsm.height();
  f.normals.resize(dsm.size());
  f.valid.assign(dsm.size(), 0);

  // Derivative of z along one axis with step `h` between neighbour samples.
  auto diff = [&](bool has_lo, float lo, float mid, bool has_hi, float hi, double h, double& out) {
    if (has_lo && has_hi) out = (double(hi) - double(lo)) / (2.0 * h);
    else if (has_hi) out = (double(hi) - double(mid)) / h;
    else if (has_lo) out = (double(mid) - double(lo)) / h;
    else return false;
    return true;
  };

  for (int r = 0; r < dsm.height(); ++r) {
    for (int c = 0; c < dsm.width(); ++c) {
      const float z = dsm(r, c);
      if (dsm.is_nodata(z)) continue;
      const bool has_w = c > 0 && dsm.valid(r, c - 1);
      const bool has_e = c + 1 < dsm.width() && dsm.valid(r, c + 1);
      const bool has_n = r > 0 && dsm.valid(r - 1, c);
      const bool has_s = r + 1 < dsm.height() && dsm.valid(r + 1, c);
      double dzdx = 0.0, dzdy = 0.0;
      // x grows with col; y grows towards the north (decreasing row).
      if (!diff(has_w, has_w ? dsm(r, c - 1) : 0.f, z, has_e, has_e ? dsm(r, c + 1) : 0.f, pixel_size, dzdx))
        continue;
      if (!diff(has_s, has_s ? dsm(r + 1, c) : 0.f, z, has_n, has_n ? dsm(r - 1, c) : 0.f, pixel_size, dzdy))
        continue;
      const double len = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
      const std::size_t i = dsm.index(r, c);
      f.normals[i] = {-dzdx / len, -dzdy / len, 1.0 / len};
      f.valid[i] = 1;
    }
  }
  return f;
}

// atan2 of |a x b| and a.b: same angle as acos(a.b) for unit vectors, but
// well conditioned near 0 degrees (identical normals give exactly 0).
inline double angle_between_deg(const Normal& a, const Normal& b) {
  const double cx = a.y * b.z - a.z * b.y, cy = a.z * b.x - a.x * b.z, cz = a.x * b.y - a.y * b.x;
  const double dot = a.x * b.x + a.y * b.y + a.z * b.z;
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot) * 180.0 / std::numbers::pi;
}

struct NormalAngleStats {
  double mean_deg = 0.0;
  double median_deg = 0.0;
  std::size_t n = 0;
  Raster angles_deg;  // per pixel, nodata where either normal is undefined
};

inline NormalAngleStats normal_angle_stats(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) throw Error("normal_angle_stats: raster dimensions differ");
  const NormalField na = compute_normals(a, a.pixel_size());
  const NormalField nb = compute_normals(b, b.pixel_size());
  NormalAngleStats s;
  s.angles_deg = Raster::like(a, a.nodata());
  std::vector<double> samples;
  samples.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!na.valid[i] || !nb.valid[i]) continue;
    // Both fields are upward (z > 0) by construction, so no sign flip is needed.
    const double ang = angle_between_deg(na.normals[i], nb.normals[i]);
    s.angles_deg.values()[i] = static_cast<float>(ang);
    samples.push_back(ang);
  }
  s.n = samples.size();
  if (!samples.empty()) {
    s.mean_deg = mean(samples);
    s.median_deg = median(samples);
  }
  return s;
}

}  // namespace lod2vec
