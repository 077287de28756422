#pragma once

// Quality metrics: height errors (MAE, RMSE, NMAD), roof-plane orientation
// error, and building-instance recall.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <json.hpp>

#include "lod2vec/geometry.hpp"
#include "lod2vec/model3d.hpp"
#include "lod2vec/raster.hpp"
#include "lod2vec/stats.hpp"

namespace lod2vec {

inline constexpr double kNmadScale = 1.4826;

struct HeightErrorStats {
  double mae = 0.0;
  double rmse = 0.0;
  double nmad = 0.0;
  std::size_t n = 0;
};

inline HeightErrorStats height_error_stats(std::span<const double> dh) {
  if (dh.empty()) throw Error("height_error_stats: no valid samples");
  HeightErrorStats s;
  s.n = dh.size();
  double abs_sum = 0.0, sq_sum = 0.0;
  for (double e : dh) {
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  s.mae = abs_sum / static_cast<double>(s.n);
  s.rmse = std::sqrt(sq_sum / static_cast<double>(s.n));
  const double m = median(dh);
  std::vector<double> dev(dh.begin(), dh.end());
  for (double& e : dev) e = std::abs(e - m);
  s.nmad = kNmadScale * median(std::move(dev));
  return s;
}

/// Errors dh = pred - target over pixels valid in both rasters (and nonzero
/// in `mask` when one is given).
inline HeightErrorStats height_error_stats(const Raster& pred, const Raster& target,
                                           std::span<const std::uint8_t> mask = {}) {
  if (!pred.same_shape(target)) throw Error("height_error_stats: raster dimensions differ");
  if (!mask.empty() && mask.size() != pred.size()) throw Error("height_error_stats: mask size mismatch");
  std::vector<double> dh;
  dh.reserve(pred.size());
  const auto p = pred.values();
  const auto t = target.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    if (pred.is_nodata(p[i]) || target.is_nodata(t[i])) continue;
    dh.push_back(double(p[i]) - double(t[i]));
  }
  return height_error_stats(dh);
}

/// Total-least-squares plane normal: eigenvector of the smallest eigenvalue
/// of the point covariance, oriented so z >= 0.
inline Vec3 fit_plane(std::span<const Vec3> points) {
  if (points.size() < 3) throw Error("fit_plane: need at least 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += Eigen::Vector3d(p.x, p.y, p.z);
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - centroid;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) throw Error("fit_plane: eigen-decomposition failed");
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  if (!(ev(1) > 1e-12 * std::max(1.0, ev(2)))) throw Error("fit_plane: degenerate (collinear) point set");
  Eigen::Vector3d n = es.eigenvectors().col(0).normalized();
  if (n.z() < 0) n = -n;
  return {n.x(), n.y(), n.z()};
}

/// Angle in degrees between two unit normals, dot product clamped to [-1, 1].
inline double normal_angle_deg(const Vec3& a, const Vec3& b) {
  const double d = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  return std::acos(d) * 180.0 / std::numbers::pi;
}

/// Per-plane pixel masks over a raster, stored as a label image: 0 = no
/// plane, k = pixel belongs to plane k (1-based).
struct RoofMask {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  int n_planes = 0;

  static RoofMask from_raster(const Raster& r) {
    RoofMask m;
    m.width = r.width();
    m.height = r.height();
    m.labels.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const float v = r.values()[i];
      m.labels[i] = r.is_nodata(v) ? 0 : static_cast<int>(std::lround(v));
      if (m.labels[i] < 0) throw Error("roof mask: negative plane label");
      m.n_planes = std::max(m.n_planes, m.labels[i]);
    }
    return m;
  }

  Raster to_raster(double pixel_size = kDefaultPixelSize) const {
    std::vector<float> v(labels.begin(), labels.end());
    return Raster(width, height, std::move(v), pixel_size);
  }
};

struct OrientationError {
  std::vector<std::optional<double>> per_plane;  // nullopt: skipped (degenerate)
  double min = 0.0, max = 0.0, mean = 0.0, sigma = 0.0;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

namespace detail {
inline std::vector<std::vector<Vec3>> plane_points(const Raster& r, const RoofMask& masks) {
  std::vector<std::vector<Vec3>> pts(masks.n_planes);
  const double ps = r.pixel_size();
  for (int row = 0; row < r.height(); ++row)
    for (int col = 0; col < r.width(); ++col) {
      const int l = masks.labels[r.index(row, col)];
      if (!l || !r.valid(row, col)) continue;
      pts[l - 1].push_back({col * ps, -row * ps, double(r(row, col))});
    }
  return pts;
}
}  // namespace detail

/// For each mask plane, fits planes to the predicted and target surfaces and
/// reports the angle between their upward normals, plus min/max/mean/sigma.
inline OrientationError orientation_error(const Raster& pred, const Raster& target, const RoofMask& masks) {
  if (!pred.same_shape(target) || pred.width() != masks.width || pred.height() != masks.height)
    throw Error("orientation_error: raster/mask dimensions differ");
  const auto pp = detail::plane_points(pred, masks);
  const auto tp = detail::plane_points(target, masks);
  OrientationError out;
  std::vector<double> angles;
  for (int k = 0; k < masks.n_planes; ++k) {
    try {
      const double a = normal_angle_deg(fit_plane(pp[k]), fit_plane(tp[k]));
      out.per_plane.emplace_back(a);
      angles.push_back(a);
    } catch (const Error& e) {
      out.per_plane.emplace_back(std::nullopt);
      out.warnings.push_back("plane " + std::to_string(k + 1) + " skipped: " + e.what());
    }
  }
  out.n = angles.size();
  if (!angles.empty()) {
    out.min = *std::min_element(angles.begin(), angles.end());
    out.max = *std::max_element(angles.begin(), angles.end());
    out.mean = mean(angles);
    out.sigma = stddev(angles);
  }
  return out;
}

/// A building footprint: one or more outer rings in a common metric frame.
using FootprintRings = std::vector<std::vector<Point2>>;

namespace detail {
namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;

inline BgMulti to_multi(const FootprintRings& rings) {
  BgMulti mp;
  for (const auto& ring : rings) {
    BgPolygon poly;
    for (const auto& p : ring) bg::append(poly.outer(), BgPoint(p.x, p.y));
    if (!ring.empty()) bg::append(poly.outer(), BgPoint(ring.front().x, ring.front().y));
    bg::correct(poly);
    mp.push_back(std::move(poly));
  }
  return mp;
}
}  // namespace detail

inline double footprint_iou(const FootprintRings& a, const FootprintRings& b) {
  namespace bg = boost::geometry;
  const auto ma = detail::to_multi(a);
  const auto mb = detail::to_multi(b);
  detail::BgMulti inter;
  bg::intersection(ma, mb, inter);
  const double i = bg::area(inter);
  const double u = bg::area(ma) + bg::area(mb) - i;
  return u > 0.0 ? i / u : 0.0;
}

struct RecallResult {
  double recall = 1.0;  // vacuously 1 when there is no truth building
  std::size_t matched = 0;
  std::size_t total = 0;
  std::vector<int> truth_to_pred;  // -1 = unmatched
};

/// Greedy best-first one-to-one matching on IoU >= threshold.
inline RecallResult instance_recall(const std::vector<FootprintRings>& pred, const std::vector<FootprintRings>& truth,
                                    double iou_threshold = 0.5) {
  struct Pair {
    double iou;
    int t, p;
  };
  struct Box {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  };
  auto box_of = [](const FootprintRings& f) {
    Box b;
    for (const auto& ring : f)
      for (const auto& p : ring) {
        b.x0 = std::min(b.x0, p.x), b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x), b.y1 = std::max(b.y1, p.y);
      }
    return b;
  };
  std::vector<Box> pb, tb;
  for (const auto& f : pred) pb.push_back(box_of(f));
  for (const auto& f : truth) tb.push_back(box_of(f));
  std::vector<Pair> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pb[p].x0 > tb[t].x1 || tb[t].x0 > pb[p].x1 || pb[p].y0 > tb[t].y1 || tb[t].y0 > pb[p].y1) continue;
      const double iou = footprint_iou(pred[p], truth[t]);
      if (iou >= iou_threshold && iou > 0.0) pairs.push_back({iou, int(t), int(p)});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.t, a.p) < std::tie(b.t, b.p);
  });
  RecallResult r;
  r.total = truth.size();
  r.truth_to_pred.assign(truth.size(), -1);
  std::vector<bool> pred_used(pred.size(), false);
  for (const auto& pr : pairs) {
    if (r.truth_to_pred[pr.t] >= 0 || pred_used[pr.p]) continue;
    r.truth_to_pred[pr.t] = pr.p;
    pred_used[pr.p] = true;
    ++r.matched;
  }
  r.recall = r.total ? static_cast<double>(r.matched) / static_cast<double>(r.total) : 1.0;
  return r;
}

/// MetricsReport JSON with fixed key order; absent parts are null.
inline nlohmann::ordered_json metrics_report_json(const std::optional<HeightErrorStats>& h,
                                                  const std::optional<OrientationError>& o,
                                                  const std::optional<RecallResult>& r) {
  nlohmann::ordered_json j;
  j["mae"] = h ? nlohmann::ordered_json(h->mae) : nlohmann::ordered_json(nullptr);
  j["rmse"] = h ? nlohmann::ordered_json(h->rmse) : nlohmann::ordered_json(nullptr);
  j["nmad"] = h ? nlohmann::ordered_json(h->nmad) : nlohmann::ordered_json(nullptr);
  j["n"] = h ? nlohmann::ordered_json(h->n) : nlohmann::ordered_json(nullptr);
  if (o) {
    nlohmann::ordered_json oj;
    const bool any = o->n > 0;
    oj["min"] = any ? nlohmann::ordered_json(o->min) : nlohmann::ordered_json(nullptr);
    oj["max"] = any ? nlohmann::ordered_json(o->max) : nlohmann::ordered_json(nullptr);
    oj["mean"] = any ? nlohmann::ordered_json(o->mean) : nlohmann::ordered_json(nullptr);
    oj["sigma"] = any ? nlohmann::ordered_json(o->sigma) : nlohmann::ordered_json(nullptr);
    oj["per_plane"] = nlohmann::ordered_json::array();
    for (const auto& a : o->per_plane)
      oj["per_plane"].push_back(a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr));
    j["orientation"] = std::move(oj);
  } else {
    j["orientation"] = nullptr;
  }
  j["recall"] = r ? nlohmann::ordered_json(r->recall) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace lod2vec
