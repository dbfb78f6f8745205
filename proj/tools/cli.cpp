#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "cortexa/components.hpp"
#include "cortexa/nifti.hpp"
#include "cortexa/patch.hpp"
#include "cortexa/phantom.hpp"
#include "cortexa/report.hpp"
#include "cortexa/stats.hpp"
#include "cortexa/thickness.hpp"

namespace cortexa::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Level { kError, kWarn, kInfo, kDebug };

Level log_level() {
  const char* env = std::getenv("CORTEXA_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string v(env);
  if (v == "debug") return Level::kDebug;
  if (v == "info") return Level::kInfo;
  if (v == "error") return Level::kError;
  return Level::kWarn;
}

template <typename... Args>
void log(Level level, fmt::format_string<Args...> f, Args&&... args) {
  if (level > log_level()) return;
  static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
  fmt::print(stderr, "cortexa [{}] {}\n", kTags[static_cast<int>(level)], fmt::format(f, std::forward<Args>(args)...));
}

// Everything that determines a run's output. Serialized into each JSON artifact.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double ribbon_radius_mm = 15.0;
  double snap_cap_mm = 2.0;
  std::int64_t stride = 32;
  double threshold = 0.5;
  int connectivity = 26;
  std::string percentile_method = "linear";
  std::uint64_t seed = 0;
  int threads = 1;

  json to_json() const {
    return {{"subcommand", subcommand},
            {"inputs", inputs},
            {"outputs", outputs},
            {"ribbon_radius_mm", ribbon_radius_mm},
            {"snap_cap_mm", snap_cap_mm},
            {"stride", stride},
            {"threshold", threshold},
            {"connectivity", connectivity},
            {"percentile_method", percentile_method},
            {"seed", seed},
            {"threads", threads}};
  }

  void validate() const {
    if (!(ribbon_radius_mm > 0)) throw Error("--ribbon-radius-mm must be positive");
    if (!(snap_cap_mm >= 0)) throw Error("--snap-mm must be non-negative");
    if (stride < 1 || stride > kPatchSize) throw Error(fmt::format("--stride must be in [1, {}]", kPatchSize));
    if (!(threshold > 0 && threshold < 1)) throw Error("--threshold must lie in (0, 1)");
    connectivity_from_int(connectivity);
    if (threads < 1) throw Error("--threads must be at least 1");
  }
};

json envelope(const RunConfig& cfg) {
  return {{"tool", "cortexa"}, {"version", CORTEXA_VERSION}, {"config", cfg.to_json()}};
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int cmd_thickness(RunConfig cfg, const std::string& mask_path, const std::string& landmarks_path,
                  const std::string& prefix, bool largest) {
  cfg.inputs = {mask_path, landmarks_path};
  cfg.outputs = {prefix + ".csv", prefix + ".json"};
  cfg.validate();
  auto mask = BinaryMask::from_volume(read_nifti(mask_path));
  const auto landmarks = read_landmarks_csv(landmarks_path);
  if (largest) mask = largest_component(mask, connectivity_from_int(cfg.connectivity));
  log(Level::kInfo, "{} landmarks, {} foreground voxels", landmarks.size(), mask.count());

  const auto report =
      thickness_at_landmarks(mask, landmarks, {cfg.ribbon_radius_mm, cfg.snap_cap_mm, cfg.threads});
  ensure_parent(prefix);
  write_text(prefix + ".csv", thickness_csv(report));
  auto j = envelope(cfg);
  j["largest_component"] = largest;
  j["landmarks"] = thickness_json(report);
  j["failures"] = report.failures();
  write_json(prefix + ".json", j);

  for (const auto& e : report.entries) {
    if (e.status == LandmarkStatus::kFailed) log(Level::kWarn, "landmark '{}' failed: {}", e.name, e.message);
  }
  return report.failures() > 0 ? kExitPartial : kExitOk;
}

int cmd_evaluate(RunConfig cfg, const std::string& pred_path, const std::string& ref_path,
                 const std::string& out) {
  cfg.inputs = {pred_path, ref_path};
  if (!out.empty()) cfg.outputs = {out};
  cfg.validate();
  const auto pred = BinaryMask::from_volume(read_nifti(pred_path));
  const auto ref = BinaryMask::from_volume(read_nifti(ref_path));
  if (!pred.grid().same_geometry(ref.grid())) {
    throw Error(fmt::format("prediction {}x{}x{} and reference {}x{}x{} differ in shape or geometry",
                            pred.dims()[0], pred.dims()[1], pred.dims()[2], ref.dims()[0], ref.dims()[1],
                            ref.dims()[2]));
  }
  auto j = envelope(cfg);
  const auto d = dice(pred, ref);
  j["dsc"] = d.percent;
  j["both_empty"] = d.both_empty;
  j["hd95"] = pred.count() > 0 && ref.count() > 0 ? json(hd95(pred, ref)) : json(nullptr);
  if (out.empty()) {
    fmt::print("{}\n", j.dump(2));
  } else {
    ensure_parent(out);
    write_json(out, j);
  }
  return kExitOk;
}

int cmd_corr(RunConfig cfg, const std::vector<std::string>& automated, const std::vector<std::string>& manual,
             const std::string& prefix, std::size_t min_subjects) {
  cfg.inputs = automated;
  cfg.inputs.insert(cfg.inputs.end(), manual.begin(), manual.end());
  cfg.outputs = {prefix + ".json", prefix + ".csv", prefix + "_pairs.csv"};
  cfg.validate();
  const auto table = compare_thickness(read_thickness_series(automated), read_thickness_series(manual), min_subjects);
  for (const auto& w : table.warnings) log(Level::kWarn, "{}", w);
  const auto rows = thickness_agreement(table);
  ensure_parent(prefix);
  auto j = envelope(cfg);
  j["icc_model"] = "average fixed raters, consistency (ICC(3,k))";
  j["landmarks"] = agreement_json(rows);
  j["warnings"] = table.warnings;
  write_json(prefix + ".json", j);
  write_text(prefix + ".csv", agreement_csv(rows));
  write_text(prefix + "_pairs.csv", paired_csv(table));
  return kExitOk;
}

int cmd_stitch(RunConfig cfg, const std::string& input, const std::string& tiles, double level,
               const std::string& out, bool gaussian) {
  cfg.inputs = {input};
  if (!tiles.empty()) cfg.inputs.push_back(tiles);
  cfg.outputs = {out, out + ".json"};
  cfg.validate();
  const Volume v = read_nifti(input);
  std::unique_ptr<PatchPredictor> predictor;
  if (!tiles.empty()) {
    predictor = std::make_unique<TileDirectoryPredictor>(tiles);
  } else {
    predictor = std::make_unique<ThresholdPredictor>(static_cast<float>(level));
  }
  log(Level::kInfo, "{} tiles", tile_origins(v.dims(), cfg.stride).size());
  const auto mask = stitch(v, *predictor, {cfg.stride, cfg.threshold, gaussian});
  ensure_parent(out);
  write_nifti(mask.to_volume(), out);
  auto j = envelope(cfg);
  j["predictor"] = tiles.empty() ? json{{"kind", "threshold"}, {"level", level}} : json{{"kind", "tiles"}};
  j["gaussian_weighting"] = gaussian;
  j["foreground_voxels"] = mask.count();
  write_json(out + ".json", j);
  return kExitOk;
}

int cmd_patches(RunConfig cfg, const std::string& input, const std::string& out_dir) {
  cfg.inputs = {input};
  cfg.outputs = {out_dir};
  cfg.validate();
  const Volume v = read_nifti(input);
  fs::create_directories(out_dir);
  json tiles = json::array();
  for (const auto& origin : tile_origins(v.dims(), cfg.stride)) {
    const Patch p = extract_patch_at(v, origin);
    const auto name = TileDirectoryPredictor::tile_name(origin);
    write_nifti(p.to_volume(), (fs::path(out_dir) / name).string());
    const auto& n = p.normalization;
    tiles.push_back({{"file", name},
                     {"origin", {origin[0], origin[1], origin[2]}},
                     {"mean", n.mean},
                     {"std", n.std},
                     {"min", n.min},
                     {"max", n.max},
                     {"degenerate", n.degenerate},
                     {"padded_voxels", n.padded_voxels}});
  }
  auto j = envelope(cfg);
  j["patch_size"] = kPatchSize;
  j["tiles"] = tiles;
  write_json((fs::path(out_dir) / "patches.json").string(), j);
  log(Level::kInfo, "wrote {} tiles", tiles.size());
  return kExitOk;
}

int cmd_phantom(RunConfig cfg, PhantomSpec spec, const std::string& out_dir) {
  spec.seed = cfg.seed;
  cfg.outputs = {out_dir};
  cfg.validate();
  const auto ph = generate_phantom(spec);
  fs::create_directories(out_dir);
  write_nifti(ph.mask.to_volume(), (fs::path(out_dir) / "mask.nii.gz").string());
  write_landmarks_csv(ph.landmarks, (fs::path(out_dir) / "landmarks.csv").string());
  auto j = envelope(cfg);
  j["phantom"] = {{"kind", to_string(spec.kind)},
                  {"thickness_mm", spec.thickness_mm},
                  {"radius_mm", spec.radius_mm},
                  {"amplitude_mm", spec.amplitude_mm},
                  {"period_mm", spec.period_mm},
                  {"extent_mm", spec.extent_mm},
                  {"dims", {spec.dims[0], spec.dims[1], spec.dims[2]}},
                  {"spacing", {spec.spacing.x(), spec.spacing.y(), spec.spacing.z()}},
                  {"rotation_deg", {spec.rotation_deg.x(), spec.rotation_deg.y(), spec.rotation_deg.z()}},
                  {"jitter", spec.jitter}};
  j["truth_thickness_mm"] = ph.thickness_mm;
  j["center_mm"] = {ph.center_mm.x(), ph.center_mm.y(), ph.center_mm.z()};
  j["foreground_voxels"] = ph.mask.count();
  write_json((fs::path(out_dir) / "truth.json").string(), j);
  return kExitOk;
}

int cmd_components(RunConfig cfg, const std::string& input, const std::string& out, bool largest) {
  cfg.inputs = {input};
  cfg.outputs = {out, out + ".json"};
  cfg.validate();
  const auto mask = BinaryMask::from_volume(read_nifti(input));
  const auto conn = connectivity_from_int(cfg.connectivity);
  const auto cc = connected_components(mask, conn);
  ensure_parent(out);
  if (largest) {
    write_nifti(largest_component(mask, conn).to_volume(), out);
  } else {
    write_nifti(cc.labels, out);
  }
  auto j = envelope(cfg);
  j["largest_only"] = largest;
  j["components"] = cc.count();
  j["sizes"] = cc.sizes;
  write_json(out + ".json", j);
  return kExitOk;
}

template <typename T>
T triple(const std::vector<double>& v) {
  return T(v[0], v[1], v[2]);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Cortical thickness and segmentation evaluation toolkit"};
  app.set_version_flag("--version", std::string(CORTEXA_VERSION));
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  };

  std::string mask_path, landmarks_path, prefix;
  bool largest = false;
  auto* th = app.add_subcommand("thickness", "Thickness at landmarks from a cortex mask");
  th->add_option("--mask", mask_path, "Binary cortex mask (NIfTI)")->required();
  th->add_option("--landmarks", landmarks_path, "Landmark CSV (name,x,y,z in mm)")->required();
  th->add_option("-o,--out", prefix, "Output prefix; writes <prefix>.csv and <prefix>.json")->required();
  th->add_option("--ribbon-radius-mm", cfg.ribbon_radius_mm, "Geodesic ribbon radius")->capture_default_str();
  th->add_option("--snap-mm", cfg.snap_cap_mm, "Largest landmark snap distance")->capture_default_str();
  th->add_flag("--largest-component", largest, "Keep only the largest connected component first");
  th->add_option("--connectivity", cfg.connectivity, "6, 18 or 26")->capture_default_str();
  add_common(th);

  std::string pred_path, ref_path, eval_out;
  auto* ev = app.add_subcommand("evaluate", "Dice and HD95 between two masks");
  ev->add_option("--pred", pred_path, "Predicted mask")->required();
  ev->add_option("--ref", ref_path, "Reference mask")->required();
  ev->add_option("-o,--out", eval_out, "JSON output (stdout when omitted)");

  std::vector<std::string> auto_files, manual_files;
  std::size_t min_subjects = 3;
  auto* co = app.add_subcommand("corr", "Automated vs manual thickness agreement");
  co->add_option("--auto", auto_files, "Automated thickness CSV(s)")->required();
  co->add_option("--manual", manual_files, "Manual thickness CSV(s)")->required();
  co->add_option("-o,--out", prefix, "Output prefix")->required();
  co->add_option("--min-subjects", min_subjects, "Fewest paired subjects per landmark")->capture_default_str();

  std::string input, tiles, out;
  double level = 0.5;
  bool gaussian = false;
  auto* st = app.add_subcommand("stitch", "Sliding-window reassembly of tile predictions");
  st->add_option("--input", input, "Intensity volume")->required();
  st->add_option("--tiles", tiles, "Directory of tile_<x>_<y>_<z>.nii.gz probabilities");
  st->add_option("--level", level, "Threshold predictor level when --tiles is absent")->capture_default_str();
  st->add_option("-o,--out", out, "Output mask")->required();
  st->add_option("--stride", cfg.stride, "Tile stride in voxels")->capture_default_str();
  st->add_option("--threshold", cfg.threshold, "Foreground probability threshold")->capture_default_str();
  st->add_flag("--gaussian", gaussian, "Gaussian-weighted averaging");

  auto* pa = app.add_subcommand("patches", "Dump normalised 64^3 tiles");
  pa->add_option("--input", input, "Intensity volume")->required();
  pa->add_option("-o,--out", out, "Output directory")->required();
  pa->add_option("--stride", cfg.stride, "Tile stride in voxels")->capture_default_str();

  PhantomSpec spec;
  std::string kind = "slab";
  std::vector<std::int64_t> dims{64, 64, 64};
  std::vector<double> spacing{1, 1, 1}, rotation{0, 0, 0};
  auto* ph = app.add_subcommand("phantom", "Synthetic mask with known thickness");
  ph->add_option("--kind", kind, "slab, hollow-sphere, folded-sheet or solid-ball")->capture_default_str();
  ph->add_option("--thickness-mm", spec.thickness_mm)->capture_default_str();
  ph->add_option("--radius-mm", spec.radius_mm)->capture_default_str();
  ph->add_option("--amplitude-mm", spec.amplitude_mm)->capture_default_str();
  ph->add_option("--period-mm", spec.period_mm)->capture_default_str();
  ph->add_option("--extent-mm", spec.extent_mm, "Lateral radius of slab/sheet (0 = unbounded)")
      ->capture_default_str();
  ph->add_option("--dims", dims)->expected(3)->delimiter(',');
  ph->add_option("--spacing", spacing)->expected(3)->delimiter(',');
  ph->add_option("--rotate", rotation, "Euler angles in degrees")->expected(3)->delimiter(',');
  ph->add_option("--jitter", spec.jitter)->capture_default_str();
  ph->add_option("--landmarks", spec.landmark_count)->capture_default_str();
  ph->add_option("--seed", cfg.seed)->capture_default_str();
  ph->add_option("-o,--out", out, "Output directory")->required();

  auto* cc = app.add_subcommand("components", "Connected component labelling");
  cc->add_option("--input", input, "Binary mask")->required();
  cc->add_option("-o,--out", out, "Label volume (or mask with --largest)")->required();
  cc->add_option("--connectivity", cfg.connectivity, "6, 18 or 26")->capture_default_str();
  cc->add_flag("--largest", largest, "Write only the largest component");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*th) {
      cfg.subcommand = "thickness";
      return cmd_thickness(cfg, mask_path, landmarks_path, prefix, largest);
    }
    if (*ev) {
      cfg.subcommand = "evaluate";
      return cmd_evaluate(cfg, pred_path, ref_path, eval_out);
    }
    if (*co) {
      cfg.subcommand = "corr";
      return cmd_corr(cfg, auto_files, manual_files, prefix, min_subjects);
    }
    if (*st) {
      cfg.subcommand = "stitch";
      return cmd_stitch(cfg, input, tiles, level, out, gaussian);
    }
    if (*pa) {
      cfg.subcommand = "patches";
      return cmd_patches(cfg, input, out);
    }
    if (*ph) {
      cfg.subcommand = "phantom";
      spec.kind = phantom_kind_from_string(kind);
      spec.dims = {dims[0], dims[1], dims[2]};
      spec.spacing = triple<Vec3>(spacing);
      spec.rotation_deg = triple<Vec3>(rotation);
      return cmd_phantom(cfg, spec, out);
    }
    if (*cc) {
      cfg.subcommand = "components";
      return cmd_components(cfg, input, out, largest);
    }
  } catch (const std::exception& e) {
    log(Level::kError, "{}", e.what());
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace cortexa::cli
