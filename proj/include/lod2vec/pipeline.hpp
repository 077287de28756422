#pragma once

// End-to-end vectorization: DSM + edge/corner probability rasters to LoD-2
// building models, plus the run report.
//
// Stages: nDSM -> edge map dilation -> corner NMS -> building instances (CCL)
// -> edge vectorization -> roof faces -> footprint + heights -> 3D models.
// Buildings that fail a stage are dropped and listed with the reason.

#include <chrono>
#include <filesystem>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "lod2vec/components.hpp"
#include "lod2vec/corner_nms.hpp"
#include "lod2vec/edge_vector.hpp"
#include "lod2vec/face_extract.hpp"
#include "lod2vec/model3d.hpp"
#include "lod2vec/morphology.hpp"
#include "lod2vec/parallel.hpp"
#include "lod2vec/raster.hpp"
#include "lod2vec/raster_io.hpp"
#include "lod2vec/stats.hpp"
#include "lod2vec/terrain.hpp"

namespace lod2vec {

inline constexpr int kReportSchema = 1;

struct PipelineConfig {
  int nms_half = kDefaultNmsHalf;
  double corner_min_prob = kDefaultCornerMinProb;
  double buffer_width = 7.0;
  double line_width = 1.0;
  int edge_dilate_half = 1;       // grayscale max filter applied to the edge map before edge tests
  int instance_bridge_half = 3;   // extra dilation when grouping edge pixels into buildings
  double tau_mean = 0.5;
  double tau_bin = 0.5;
  int height_window_half = kDefaultHeightWindowHalf;
  int ndsm_se_half = kDefaultNdsmSeHalf;
  double iou_threshold = 0.5;
  int workers = 1;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0)) throw Error(std::string("config: ") + name + " must be positive");
    };
    auto non_negative = [](double v, const char* name) {
      if (!(v >= 0)) throw Error(std::string("config: ") + name + " must be non-negative");
    };
    auto probability = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string("config: ") + name + " must lie in [0,1]");
    };
    positive(nms_half, "nms_half");
    probability(corner_min_prob, "corner_min_prob");
    positive(buffer_width, "buffer_width");
    positive(line_width, "line_width");
    non_negative(edge_dilate_half, "edge_dilate_half");
    non_negative(instance_bridge_half, "instance_bridge_half");
    probability(tau_mean, "tau_mean");
    probability(tau_bin, "tau_bin");
    positive(height_window_half, "height_window_half");
    positive(ndsm_se_half, "ndsm_se_half");
    probability(iou_threshold, "iou_threshold");
    positive(workers, "workers");
  }

  EdgeParams edge_params() const {
    return {buffer_width, line_width, static_cast<float>(tau_mean), static_cast<float>(tau_bin), nms_half};
  }
};

namespace detail {

template <class T>
void read_key(const toml::table& t, std::string_view key, T& field) {
  const auto node = t[key];
  if (!node) return;
  if constexpr (std::is_integral_v<T>) {
    const auto v = node.value<std::int64_t>();
    if (!v || !node.is_integer()) throw Error("config: " + std::string(key) + " must be an integer");
    field = static_cast<T>(*v);
  } else {
    const auto v = node.value<double>();
    if (!v) throw Error("config: " + std::string(key) + " must be a number");
    field = *v;
  }
}

}  // namespace detail

/// Overrides `base` with the keys present in a TOML document. Unknown keys
/// are rejected so that typos do not silently fall back to defaults.
inline PipelineConfig parse_config_toml(std::string_view text, PipelineConfig base = {}) {
  toml::table t;
  try {
    t = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(std::string("config: ") + std::string(e.description()));
  }
  static const std::set<std::string, std::less<>> known = {
      "nms_half",  "corner_min_prob",    "buffer_width",  "line_width",    "edge_dilate_half", "instance_bridge_half",
      "tau_mean",  "tau_bin",            "height_window_half", "ndsm_se_half", "iou_threshold", "workers"};
  for (const auto& [k, v] : t)
    if (!known.count(k.str())) throw Error("config: unknown key '" + std::string(k.str()) + "'");
  detail::read_key(t, "nms_half", base.nms_half);
  detail::read_key(t, "corner_min_prob", base.corner_min_prob);
  detail::read_key(t, "buffer_width", base.buffer_width);
  detail::read_key(t, "line_width", base.line_width);
  detail::read_key(t, "edge_dilate_half", base.edge_dilate_half);
  detail::read_key(t, "instance_bridge_half", base.instance_bridge_half);
  detail::read_key(t, "tau_mean", base.tau_mean);
  detail::read_key(t, "tau_bin", base.tau_bin);
  detail::read_key(t, "height_window_half", base.height_window_half);
  detail::read_key(t, "ndsm_se_half", base.ndsm_se_half);
  detail::read_key(t, "iou_threshold", base.iou_threshold);
  detail::read_key(t, "workers", base.workers);
  base.validate();
  return base;
}

inline nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["nms_half"] = c.nms_half;
  j["corner_min_prob"] = c.corner_min_prob;
  j["buffer_width"] = c.buffer_width;
  j["line_width"] = c.line_width;
  j["edge_dilate_half"] = c.edge_dilate_half;
  j["instance_bridge_half"] = c.instance_bridge_half;
  j["tau_mean"] = c.tau_mean;
  j["tau_bin"] = c.tau_bin;
  j["height_window_half"] = c.height_window_half;
  j["ndsm_se_half"] = c.ndsm_se_half;
  j["iou_threshold"] = c.iou_threshold;
  return j;  // workers is deliberately absent: outputs must not depend on it
}

struct DroppedBuilding {
  int instance_id = 0;
  std::string reason;
};

struct BuildingSummary {
  int instance_id = 0;
  std::size_t n_corners = 0;
  std::size_t n_edges = 0;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  int width = 0;
  int height = 0;
  double pixel_size = 0.0;
  Raster ndsm;
  CornerSet corners;  // with instance ids
  EdgeSet edges;
  int n_instances = 0;
  std::vector<BuildingModel3D> models;  // ascending instance id
  std::vector<BuildingSummary> summaries;  // parallel to models
  std::vector<double> z_offset;         // ground height per model (absolute mode) or empty
  std::vector<DroppedBuilding> dropped;
  std::vector<StageTiming> timing;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out), start_(std::chrono::steady_clock::now()) {}
  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.push_back({std::move(stage), std::chrono::duration<double, std::milli>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& out_;
  std::chrono::steady_clock::time_point start_;
};

struct BuildingOutcome {
  std::optional<BuildingModel3D> model;
  BuildingSummary summary;
  double ground = 0.0;
  std::string reason;
};

inline BuildingOutcome reconstruct_building(int id, const std::vector<int>& members, const CornerSet& corners,
                                            const EdgeSet& edges, const Raster& ndsm, const Raster* ground,
                                            const PipelineConfig& cfg) {
  BuildingOutcome out;
  out.summary.instance_id = id;
  out.summary.n_corners = members.size();
  if (members.size() < 3) {
    out.reason = "fewer than 3 corners";
    return out;
  }
  std::map<int, int> local;
  PlanarGraph g;
  std::vector<Pixel> pixels;
  for (int m : members) {
    local[m] = static_cast<int>(g.vertices.size());
    g.vertices.push_back({double(corners[m].col), -double(corners[m].row)});
    pixels.push_back(corners[m].pixel());
  }
  for (const Edge& e : edges)
    if (e.instance_id == id) g.edges.emplace_back(local.at(e.a), local.at(e.b));
  out.summary.n_edges = g.edges.size();
  try {
    const auto faces = extract_faces(g, id);
    if (faces.empty()) {
      out.reason = "no closed roof face";
      return out;
    }
    const Footprint fp = footprint_union(faces, g.vertices);
    const auto z = assign_heights(ndsm, pixels, cfg.height_window_half);
    std::set<int> used;
    for (const auto& f : faces) used.insert(f.ring.begin(), f.ring.end());
    for (int v : used)
      if (ndsm.is_nodata(z[v])) {
        out.reason = "corner height window has no valid nDSM data";
        return out;
      }
    out.model = build_model(id, faces, fp, g.vertices, z, ndsm.pixel_size());
    if (ground) {
      std::vector<double> g0;
      for (int v : used) {
        const float gv = (*ground)(pixels[v].row, pixels[v].col);
        if (!ground->is_nodata(gv)) g0.push_back(gv);
      }
      out.ground = g0.empty() ? 0.0 : median(std::span<const double>(g0));
    }
  } catch (const Error& e) {
    out.model.reset();
    out.reason = e.what();
  }
  return out;
}

}  // namespace detail

inline void check_same_grid(const Raster& a, const Raster& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(std::string("dimension mismatch: ") + what + " is " + std::to_string(b.width()) + "x" +
                std::to_string(b.height()) + ", DSM is " + std::to_string(a.width()) + "x" +
                std::to_string(a.height()));
}

/// Runs the full pipeline. With `absolute_heights`, each model is offset by
/// the median estimated ground height under its corners (z_offset).
inline PipelineResult run_vectorize(const Raster& dsm, const Raster& edge_prob, const Raster& corner_prob,
                                    const PipelineConfig& cfg = {}, bool absolute_heights = false) {
  cfg.validate();
  check_same_grid(dsm, edge_prob, "edge raster");
  check_same_grid(dsm, corner_prob, "corner raster");
  PipelineResult res;
  res.width = dsm.width();
  res.height = dsm.height();
  res.pixel_size = dsm.pixel_size();
  detail::StageClock clock(res.timing);

  const Raster ground = estimate_ground(dsm, cfg.ndsm_se_half);
  res.ndsm = ndsm_from_ground(dsm, ground);
  clock.lap("ndsm");

  const Raster edges = cfg.edge_dilate_half > 0 ? dilate(edge_prob, cfg.edge_dilate_half) : edge_prob;
  const Raster grouping =
      cfg.instance_bridge_half > 0 ? dilate(edges, cfg.instance_bridge_half) : edges;
  clock.lap("edge_dilation");

  CornerSet corners = nms_select(corner_prob, cfg.nms_half, static_cast<float>(cfg.corner_min_prob));
  clock.lap("corner_nms");

  const LabelMap instances = label_components(grouping, static_cast<float>(cfg.tau_bin));
  res.n_instances = instances.n_components;
  res.corners = assign_corners_to_instances(std::move(corners), instances, cfg.nms_half);
  clock.lap("instances");

  res.edges = vectorize_edges(edges, res.corners, cfg.edge_params(), cfg.workers);
  clock.lap("edges");

  const auto groups = corners_by_instance(res.corners);
  std::vector<std::pair<int, const std::vector<int>*>> jobs;
  for (const auto& [id, members] : groups) jobs.emplace_back(id, &members);
  std::vector<detail::BuildingOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    outcomes[j] = detail::reconstruct_building(jobs[j].first, *jobs[j].second, res.corners, res.edges, res.ndsm,
                                               absolute_heights ? &ground : nullptr, cfg);
  });
  // Instances that carry edge pixels but received no corner at all.
  std::set<int> with_corners;
  for (const auto& [id, m] : groups) with_corners.insert(id);
  for (int id = 1; id <= instances.n_components; ++id)
    if (!with_corners.count(id)) res.dropped.push_back({id, "no corners"});
  for (auto& o : outcomes) {
    if (o.model) {
      res.models.push_back(std::move(*o.model));
      res.summaries.push_back(o.summary);
      if (absolute_heights) res.z_offset.push_back(o.ground);
    } else {
      res.dropped.push_back({o.summary.instance_id, o.reason});
    }
  }
  std::sort(res.dropped.begin(), res.dropped.end(),
            [](const DroppedBuilding& a, const DroppedBuilding& b) { return a.instance_id < b.instance_id; });
  clock.lap("models");
  return res;
}

/// Deterministic run report (no timing; see timing_json).
inline nlohmann::ordered_json report_json(const PipelineResult& r, const PipelineConfig& cfg, bool absolute_heights) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["raster"] = {{"width", r.width}, {"height", r.height}, {"pixel_size", r.pixel_size}};
  j["config"] = config_to_json(cfg);
  j["absolute_heights"] = absolute_heights;
  j["n_instances"] = r.n_instances;
  j["n_corners"] = r.corners.size();
  j["n_edges"] = r.edges.size();
  j["n_buildings"] = r.models.size();
  j["n_dropped"] = r.dropped.size();
  j["buildings"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    const auto& m = r.models[i];
    const double dz = r.z_offset.empty() ? 0.0 : r.z_offset[i];
    nlohmann::ordered_json b;
    b["instance_id"] = m.instance_id;
    b["n_corners"] = r.summaries[i].n_corners;
    b["n_edges"] = r.summaries[i].n_edges;
    b["n_roof_faces"] = m.roof_faces.size();
    b["n_vertices"] = m.vertices.size();
    b["ridge_m"] = m.ridge_m + dz;
    b["eave_m"] = m.eave_m + dz;
    b["warnings"] = m.warnings;
    j["buildings"].push_back(std::move(b));
  }
  j["dropped"] = nlohmann::ordered_json::array();
  for (const auto& d : r.dropped) j["dropped"].push_back({{"instance_id", d.instance_id}, {"reason", d.reason}});
  return j;
}

inline nlohmann::ordered_json timing_json(const std::vector<StageTiming>& timing) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["stages"] = nlohmann::ordered_json::array();
  double total = 0.0;
  for (const auto& t : timing) {
    j["stages"].push_back({{"stage", t.stage}, {"ms", t.ms}});
    total += t.ms;
  }
  j["total_ms"] = total;
  return j;
}

/// The vectorize command: loads the three rasters, runs the pipeline and
/// writes model.obj, buildings.geojson, report.json and timing.json to `out`.
inline PipelineResult vectorize_files(const std::filesystem::path& dsm_path, const std::filesystem::path& edge_path,
                                      const std::filesystem::path& corner_path, const std::filesystem::path& out,
                                      const PipelineConfig& cfg = {}, bool absolute_heights = false) {
  cfg.validate();
  const Raster dsm = load_input_raster(dsm_path, "DSM");
  const Raster edges = load_input_raster(edge_path, "edge raster");
  const Raster corners = load_input_raster(corner_path, "corner raster");
  PipelineResult r = run_vectorize(dsm, edges, corners, cfg, absolute_heights);
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  write_text_file(out / "model.obj", export_obj(r.models, r.z_offset));
  write_text_file(out / "buildings.geojson", export_geojson(r.models, r.z_offset));
  write_text_file(out / "report.json", report_json(r, cfg, absolute_heights).dump(2) + "\n");
  r.timing.push_back(
      {"export", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()});
  write_text_file(out / "timing.json", timing_json(r.timing).dump(2) + "\n");
  return r;
}

}  // namespace lod2vec
