// lod2vec command-line front end.
//
//   lod2vec vectorize --dsm D --edges E --corners C --out DIR [--config F.toml] [--absolute-heights]
//   lod2vec ndsm      --dsm D --out F [--se-half N]
//   lod2vec synth     --seed S --out DIR [scene and degradation options]
//   lod2vec metrics   [--pred-dsm P --target-dsm T [--masks M]] [--pred-models G --truth G|truth.json] [--out F]
//
// Exit codes: 0 success, 1 input error, 2 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lod2vec.hpp"

namespace fs = std::filesystem;
using namespace lod2vec;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct VectorizeArgs {
  std::string dsm, edges, corners, out, config;
  bool absolute_heights = false;
  PipelineConfig flags;
};

struct ConfigFlag {
  CLI::Option* opt;
  std::function<void(PipelineConfig&)> apply;
};

template <class T>
ConfigFlag add_config_flag(CLI::App* app, const std::string& name, T PipelineConfig::*field, PipelineConfig& store,
                           const std::string& help) {
  auto* opt = app->add_option(name, store.*field, help)->capture_default_str();
  return {opt, [field, &store](PipelineConfig& c) { c.*field = store.*field; }};
}

int run_vectorize_cmd(const VectorizeArgs& a, const std::vector<ConfigFlag>& flags) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = parse_config_toml(read_text_file(a.config));
  for (const auto& f : flags)
    if (f.opt->count() > 0) f.apply(cfg);
  cfg.validate();

  const PipelineResult r = vectorize_files(a.dsm, a.edges, a.corners, a.out, cfg, a.absolute_heights);
  std::cout << r.models.size() << " buildings, " << r.dropped.size() << " dropped -> " << a.out << "\n";
  return 0;
}

struct NdsmArgs {
  std::string dsm, out;
  int se_half = kDefaultNdsmSeHalf;
};

int run_ndsm_cmd(const NdsmArgs& a) {
  const Raster dsm = load_input_raster(a.dsm, "DSM");
  save_raster(generate_ndsm(dsm, a.se_half), a.out);
  return 0;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string out;
  SceneParams scene;
  DegradeParams degrade;
  bool degrade_seed_set = false;
};

int run_synth_cmd(SynthArgs a) {
  const SceneTruth truth = generate_scene(a.seed, a.scene);
  const SceneRasters clean = rasterize_truth(truth);
  const fs::path out(a.out);
  fs::create_directories(out);
  auto write_set = [&](const SceneRasters& s, const fs::path& dir) {
    fs::create_directories(dir);
    save_raster(s.dsm, dir / "dsm.f32");
    save_raster(s.edge_prob, dir / "edges.f32");
    save_raster(s.corner_prob, dir / "corners.f32");
    save_raster(s.truth_masks.to_raster(truth.pixel_size), dir / "masks.f32");
  };
  write_set(clean, out);
  write_text_file(out / "truth.json", scene_to_json(truth).dump(2) + "\n");
  const auto& d = a.degrade;
  if (d.dsm_noise_sigma > 0 || d.edge_dropout > 0 || d.corner_jitter > 0 || d.dsm_quantization > 0) {
    if (!a.degrade_seed_set) a.degrade.seed = a.seed;
    write_set(degrade(clean, a.degrade), out / "degraded");
  }
  std::cout << truth.buildings.size() << " buildings -> " << out.string() << "\n";
  return 0;
}

struct MetricsArgs {
  std::string pred_dsm, target_dsm, masks, pred_models, truth, out;
  double iou = 0.5;
};

std::vector<FootprintRings> load_truth_footprints(const fs::path& p) {
  const std::string text = read_text_file(p);
  const auto j = nlohmann::json::parse(text);
  if (j.contains("buildings")) return truth_footprints(scene_from_json(j));
  return read_footprints_geojson(text);
}

int run_metrics_cmd(const MetricsArgs& a) {
  std::optional<HeightErrorStats> h;
  std::optional<OrientationError> o;
  std::optional<RecallResult> rec;
  if (!a.pred_dsm.empty() || !a.target_dsm.empty()) {
    if (a.pred_dsm.empty() || a.target_dsm.empty()) throw Error("--pred-dsm and --target-dsm go together");
    const Raster pred = load_input_raster(a.pred_dsm, "predicted DSM");
    const Raster target = load_input_raster(a.target_dsm, "target DSM");
    check_same_grid(target, pred, "predicted DSM");
    h = height_error_stats(pred, target);
    if (!a.masks.empty()) {
      const Raster m = load_input_raster(a.masks, "mask raster");
      check_same_grid(target, m, "mask raster");
      o = orientation_error(pred, target, RoofMask::from_raster(m));
    }
  } else if (!a.masks.empty()) {
    throw Error("--masks requires --pred-dsm and --target-dsm");
  }
  if (!a.pred_models.empty() || !a.truth.empty()) {
    if (a.pred_models.empty() || a.truth.empty()) throw Error("--pred-models and --truth go together");
    if (!fs::exists(a.pred_models)) throw Error("predicted models not found: " + a.pred_models);
    if (!fs::exists(a.truth)) throw Error("truth not found: " + a.truth);
    rec = instance_recall(read_footprints_geojson(read_text_file(a.pred_models)), load_truth_footprints(a.truth), a.iou);
  }
  if (!h && !rec) throw Error("nothing to evaluate: give --pred-dsm/--target-dsm and/or --pred-models/--truth");
  const std::string text = metrics_report_json(h, o, rec).dump(2) + "\n";
  if (a.out.empty()) std::cout << text;
  else write_text_file(a.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lod2vec: LoD-2 building models from DSM, edge and corner probability rasters"};
  app.require_subcommand(1);

  VectorizeArgs va;
  auto* vec = app.add_subcommand("vectorize", "Reconstruct building models");
  vec->add_option("--dsm", va.dsm, "DSM raster (.f32 or .asc)")->required();
  vec->add_option("--edges", va.edges, "Edge probability raster")->required();
  vec->add_option("--corners", va.corners, "Corner probability raster")->required();
  vec->add_option("--out", va.out, "Output directory")->required();
  vec->add_option("--config", va.config, "TOML config file; flags override it");
  vec->add_flag("--absolute-heights", va.absolute_heights, "Add the estimated ground height to model z");
  std::vector<ConfigFlag> flags = {
      add_config_flag(vec, "--nms-half", &PipelineConfig::nms_half, va.flags, "Corner NMS window half size"),
      add_config_flag(vec, "--corner-min-prob", &PipelineConfig::corner_min_prob, va.flags, "Corner threshold"),
      add_config_flag(vec, "--buffer-width", &PipelineConfig::buffer_width, va.flags, "Rectangle buffer width (px)"),
      add_config_flag(vec, "--line-width", &PipelineConfig::line_width, va.flags, "Line buffer width (px)"),
      add_config_flag(vec, "--edge-dilate-half", &PipelineConfig::edge_dilate_half, va.flags,
                      "Edge map max-filter half size"),
      add_config_flag(vec, "--instance-bridge-half", &PipelineConfig::instance_bridge_half, va.flags,
                      "Extra dilation for building grouping"),
      add_config_flag(vec, "--tau-mean", &PipelineConfig::tau_mean, va.flags, "Line buffer mean threshold"),
      add_config_flag(vec, "--tau-bin", &PipelineConfig::tau_bin, va.flags, "Edge binarization threshold"),
      add_config_flag(vec, "--height-window-half", &PipelineConfig::height_window_half, va.flags,
                      "Corner height window half size"),
      add_config_flag(vec, "--ndsm-se-half", &PipelineConfig::ndsm_se_half, va.flags, "Ground opening half size"),
      add_config_flag(vec, "--iou-threshold", &PipelineConfig::iou_threshold, va.flags, "Recall IoU threshold"),
      add_config_flag(vec, "--workers", &PipelineConfig::workers, va.flags, "Worker threads"),
  };

  NdsmArgs na;
  auto* nd = app.add_subcommand("ndsm", "Compute a normalized DSM");
  nd->add_option("--dsm", na.dsm, "DSM raster")->required();
  nd->add_option("--out", na.out, "Output raster (.f32 or .asc)")->required();
  nd->add_option("--se-half", na.se_half, "Opening half size")->capture_default_str()->check(CLI::PositiveNumber);

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic scene");
  sy->add_option("--seed", sa.seed, "Scene seed")->required();
  sy->add_option("--out", sa.out, "Output directory")->required();
  sy->add_option("--n-buildings", sa.scene.n_buildings, "Number of buildings")->capture_default_str();
  sy->add_option("--width", sa.scene.width, "Raster width")->capture_default_str();
  sy->add_option("--height", sa.scene.height, "Raster height")->capture_default_str();
  sy->add_option("--pixel-size", sa.scene.pixel_size, "Pixel size (m)")->capture_default_str();
  sy->add_option("--gable-fraction", sa.scene.gable_fraction, "Share of gable roofs")->capture_default_str();
  sy->add_option("--noise", sa.degrade.dsm_noise_sigma, "DSM Gaussian noise sigma (m)")->capture_default_str();
  sy->add_option("--dropout", sa.degrade.edge_dropout, "Edge pixel dropout probability")->capture_default_str();
  sy->add_option("--jitter", sa.degrade.corner_jitter, "Corner jitter (px)")->capture_default_str();
  sy->add_option("--quantization", sa.degrade.dsm_quantization, "DSM quantization step (m)")->capture_default_str();
  auto* dseed = sy->add_option("--degrade-seed", sa.degrade.seed, "Degradation seed (default: scene seed)");

  MetricsArgs ma;
  auto* me = app.add_subcommand("metrics", "Evaluate heights, orientation and recall");
  me->add_option("--pred-dsm", ma.pred_dsm, "Predicted DSM / nDSM raster");
  me->add_option("--target-dsm", ma.target_dsm, "Reference raster");
  me->add_option("--masks", ma.masks, "Roof plane label raster");
  me->add_option("--pred-models", ma.pred_models, "Predicted buildings GeoJSON");
  me->add_option("--truth", ma.truth, "Truth footprints (GeoJSON or synth truth.json)");
  me->add_option("--iou", ma.iou, "IoU threshold")->capture_default_str();
  me->add_option("--out", ma.out, "Output JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (vec->parsed()) return run_vectorize_cmd(va, flags);
    if (nd->parsed()) return run_ndsm_cmd(na);
    if (sy->parsed()) {
      sa.degrade_seed_set = dseed->count() > 0;
      return run_synth_cmd(sa);
    }
    if (me->parsed()) return run_metrics_cmd(ma);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
