// navkit: batch front end for the indoor-navigation data toolkit.
//
// Subcommands chain the pipeline stages: simulate renders synthetic
// episodes, estimate recovers per-frame camera yaw from flow and depth,
// label discretizes yaw into direction classes, genpaths recombines
// annotated map segments into synthetic routes, mask produces masking
// augmentation plans, evaluate scores predicted labels.
//
// Exit codes: 0 success, 2 usage error, 11 validation, 12 numeric,
// 13 graph, 14 file format, 15 geometry, 20 unexpected failure.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "navkit/navkit.hpp"

namespace {

using json = nlohmann::json;
constexpr double kDeg = std::numbers::pi / 180.0;

void emit_error_record(const std::string& kind, int family,
                       const std::string& message) {
  std::cerr << json{{"error",
                     {{"kind", kind}, {"family", family}, {"message", message}}}}
                   .dump()
            << "\n";
}

navkit::camera_motion::CameraIntrinsics square_intrinsics(std::uint32_t side,
                                                          double focal) {
  navkit::camera_motion::CameraIntrinsics intrinsics;
  intrinsics.focal_length = focal;
  intrinsics.pixel_pitch = 1.0;
  intrinsics.cx = (side - 1) / 2.0;
  intrinsics.cy = (side - 1) / 2.0;
  intrinsics.width = side;
  intrinsics.height = side;
  return intrinsics;
}

struct Scenario {
  navkit::sim_world::ScenePlan scene;
  navkit::sim_world::Trajectory trajectory;
};

Scenario built_in_scenario(const std::string& name, double fps) {
  using navkit::sim_world::ScenePlan;
  using navkit::sim_world::walk_waypoints;
  const double speed = 0.08;
  const double turn_rate = 1.5 * kDeg;

  if (name == "straight") {
    Scenario scenario;
    scenario.scene = ScenePlan::from_ascii({"########", "#......#", "########"},
                                           4.0, 0.0, 3.0);
    scenario.trajectory =
        walk_waypoints({{6.0, 6.0}, {26.0, 6.0}}, 1.5, speed, turn_rate, fps);
    return scenario;
  }
  if (name == "l-turn") {
    Scenario scenario;
    scenario.scene =
        ScenePlan::from_ascii({"#####", "###.#", "#...#", "#####"}, 4.0, 0.0, 3.0);
    scenario.trajectory = walk_waypoints(
        {{6.0, 10.0}, {14.0, 10.0}, {14.0, 6.0}}, 1.5, speed, turn_rate, fps);
    return scenario;
  }
  if (name == "five-turns") {
    // winding corridor with five corners (right, left, left, right, right)
    Scenario scenario;
    scenario.scene = ScenePlan::from_ascii(
        {
            "###############",
            "#.....###.....#",
            "#####.###.###.#",
            "#####.###.###.#",
            "#####.....###.#",
            "###############",
        },
        4.0, 0.0, 3.0);
    scenario.trajectory = walk_waypoints(
        {{6.0, 6.0},
         {22.0, 6.0},
         {22.0, 18.0},
         {38.0, 18.0},
         {38.0, 6.0},
         {54.0, 6.0},
         {54.0, 18.0}},
        1.5, speed, turn_rate, fps);
    return scenario;
  }
  throw navkit::InvariantViolation("unknown scenario: " + name);
}

int cmd_simulate(const std::string& scenario_name, const std::string& scene_path,
                 const std::string& trajectory_path, const std::string& out_dir,
                 std::uint32_t side, double focal, double fps,
                 std::uint64_t seed) {
  namespace io = navkit::dataset_io;
  namespace sim = navkit::sim_world;

  Scenario scenario;
  std::vector<std::pair<std::string, std::string>> inputs;
  if (!scene_path.empty() || !trajectory_path.empty()) {
    if (scene_path.empty() || trajectory_path.empty()) {
      throw navkit::InvariantViolation(
          "--scene and --trajectory must be given together");
    }
    scenario.scene = io::load_scene(scene_path);
    scenario.trajectory = io::load_trajectory(trajectory_path);
    inputs = {{"scene", scene_path}, {"trajectory", trajectory_path}};
  } else {
    scenario = built_in_scenario(scenario_name, fps);
  }

  const auto intrinsics = square_intrinsics(side, focal);
  const sim::EpisodeBundle bundle =
      sim::synthesize_episode(scenario.scene, scenario.trajectory, intrinsics);

  std::filesystem::create_directories(out_dir);
  const auto at = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  io::EpisodeRecord episode;
  episode.video_id = "sim0";
  episode.fps = scenario.trajectory.fps;
  episode.frame_count = bundle.flow.size();
  episode.intrinsics = intrinsics;
  char name[64];
  for (std::size_t t = 0; t < bundle.flow.size(); ++t) {
    std::snprintf(name, sizeof(name), "flow_%05zu.nvr", t);
    io::write_raster(bundle.flow[t], at(name));
    episode.flow_paths.emplace_back(name);
    std::snprintf(name, sizeof(name), "depth_%05zu.nvr", t);
    io::write_raster(bundle.depth[t], at(name));
    episode.depth_paths.emplace_back(name);
  }

  const json provenance = io::make_provenance(seed, inputs);
  io::save_yaw_series(bundle.yaw, at("yaw_gt.json"), {}, provenance);
  episode.yaw_path = "yaw_gt.json";

  const auto label_config =
      navkit::heading_labeler::LabelConfig::for_fps(scenario.trajectory.fps);
  io::save_labels(navkit::heading_labeler::label_frames(bundle.yaw, label_config),
                  at("labels_gt.json"), provenance);
  episode.label_path = "labels_gt.json";

  io::save_scene(scenario.scene, at("scene.txt"));
  io::save_trajectory(scenario.trajectory, at("trajectory.json"));

  io::DatasetManifest manifest;
  manifest.provenance = provenance;
  manifest.episodes.push_back(episode);
  io::save_manifest(manifest, at("manifest.json"));

  std::cout << "wrote " << bundle.flow.size() << " frame transitions to "
            << out_dir << "\n";
  return 0;
}

int cmd_estimate(const std::string& manifest_path,
                 const std::string& intrinsics_path, const std::string& out_path,
                 int samples, std::uint64_t seed, bool residual_report) {
  namespace io = navkit::dataset_io;
  namespace cm = navkit::camera_motion;

  const io::DatasetManifest manifest = io::load_manifest(manifest_path);
  if (manifest.episodes.empty()) {
    throw navkit::InvariantViolation("manifest lists no episodes");
  }
  const io::EpisodeRecord& episode = manifest.episodes.front();
  cm::CameraIntrinsics intrinsics = episode.intrinsics;
  if (!intrinsics_path.empty()) {
    intrinsics = io::load_intrinsics(intrinsics_path);
  }

  cm::EstimationConfig config;
  config.sample_count = samples;
  config.rng_seed = seed;
  config.residual_report = residual_report;

  navkit::heading_labeler::YawSeries yaw;
  yaw.fps = episode.fps;
  std::vector<double> residuals;
  for (std::size_t t = 0; t < episode.frame_count; ++t) {
    const navkit::Raster flow = io::read_raster(episode.flow_paths[t]);
    const navkit::Raster depth = io::read_raster(episode.depth_paths[t]);
    // one independent draw per frame, reproducible from the base seed
    cm::EstimationConfig frame_config = config;
    frame_config.rng_seed = seed + t;
    const auto pixels = cm::sample_pixels(flow, depth, intrinsics, frame_config);
    const cm::EstimationResult result = cm::estimate_motion(pixels, intrinsics);
    yaw.values.push_back(cm::extract_yaw(result.motion));
    residuals.push_back(result.rms_residual);
  }

  io::save_yaw_series(yaw, out_path,
                      residual_report ? residuals : std::vector<double>{},
                      io::make_provenance(seed, {{"manifest", manifest_path}}));
  std::cout << "estimated " << yaw.values.size() << " frame transitions\n";
  return 0;
}

int cmd_label(const std::string& yaw_path, const std::string& out_path,
              const std::string& weights_path, int window, int lookahead,
              const std::string& mode, std::uint64_t seed) {
  namespace io = navkit::dataset_io;
  namespace hl = navkit::heading_labeler;

  const hl::YawSeries yaw = io::load_yaw_series(yaw_path);
  hl::LabelConfig config = hl::LabelConfig::for_fps(yaw.fps);
  config.smoothing_window = window;
  if (lookahead > 0) config.lookahead_frames = lookahead;
  if (mode == "rate") {
    config.mode = hl::LabelMode::rate_threshold;
  } else if (mode != "heading") {
    throw navkit::InvariantViolation("mode must be heading or rate, got " + mode);
  }

  const hl::DirectionLabelSeries labels = hl::label_frames(yaw, config);
  const json provenance = io::make_provenance(seed, {{"yaw", yaw_path}});
  io::save_labels(labels, out_path, provenance);
  if (!weights_path.empty()) {
    io::write_json_file(weights_path,
                        json{{"schema_version", 1},
                             {"weights", hl::class_weights(labels)},
                             {"provenance", provenance}});
  }
  std::cout << "labeled " << labels.labels.size() << " frames\n";
  return 0;
}

int cmd_genpaths(const std::string& map_path, int count, std::uint64_t seed,
                 const std::string& out_path, bool coverage_report) {
  namespace io = navkit::dataset_io;
  namespace rg = navkit::route_graph;

  const io::MapDocument doc = io::load_map(map_path);
  if (coverage_report) {
    const auto missing = rg::validate_coverage(doc.map, doc.annotations);
    std::cout << "missing triplets: " << missing.size() << "\n";
    for (const auto& key : missing) {
      std::cout << "  " << key.to_string() << "\n";
    }
  }

  std::vector<rg::SyntheticPath> paths;
  navkit::Rng seeder(seed);
  for (int i = 0; i < count; ++i) {
    paths.push_back(
        rg::generate_path(doc.map, doc.annotations, seeder.next_u64()));
  }
  if (!out_path.empty()) {
    io::save_paths(paths, out_path, io::make_provenance(seed, {{"map", map_path}}));
  }
  std::cout << "generated " << paths.size() << " paths\n";
  return 0;
}

int cmd_mask(const std::string& mode, std::uint32_t width, std::uint32_t height,
             int count, double min_frac, double max_frac, std::uint64_t seed,
             const std::string& attention_path, const std::string& detections_path,
             const std::string& flags_path, double hard_fraction,
             const std::string& out_path, const std::string& apply_path,
             const std::string& out_raster_path) {
  namespace io = navkit::dataset_io;
  namespace ma = navkit::mask_augment;

  if (mode == "curriculum") {
    if (flags_path.empty()) {
      throw navkit::InvariantViolation("curriculum mode needs --flags");
    }
    const json doc = io::read_json_file(flags_path);
    const json& entries = doc.at("flags");
    std::unique_ptr<bool[]> flags(new bool[entries.size()]);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      flags[i] = entries.at(i).get<int>() != 0;
    }
    const std::vector<double> weights = ma::curriculum_weights(
        std::span<const bool>(flags.get(), entries.size()), hard_fraction);
    io::write_json_file(
        out_path, json{{"schema_version", 1},
                       {"weights", weights},
                       {"provenance",
                        io::make_provenance(seed, {{"flags", flags_path}})}});
    std::cout << "weighted " << weights.size() << " examples\n";
    return 0;
  }

  ma::ImageSize size{width, height};
  ma::MaskPlan plan;
  std::vector<std::pair<std::string, std::string>> inputs;
  if (mode == "rand") {
    plan = ma::rand_mask(size, count, {min_frac, max_frac}, seed);
  } else if (mode == "grad") {
    if (attention_path.empty()) {
      throw navkit::InvariantViolation("grad mode needs --attention");
    }
    ma::AttentionMap attention;
    attention.grid = io::read_raster(attention_path);
    size = {attention.grid.width(), attention.grid.height()};
    plan = ma::grad_mask(attention, count, {min_frac, max_frac}, seed);
    inputs.emplace_back("attention", attention_path);
  } else if (mode == "people") {
    if (detections_path.empty()) {
      throw navkit::InvariantViolation("people mode needs --detections");
    }
    const json doc = io::read_json_file(detections_path);
    std::vector<ma::MaskBox> detections;
    for (const json& entry : doc.at("boxes")) {
      detections.push_back({entry.at("x").get<std::int64_t>(),
                            entry.at("y").get<std::int64_t>(),
                            entry.at("width").get<std::int64_t>(),
                            entry.at("height").get<std::int64_t>()});
    }
    plan = ma::people_mask(detections, size, seed);
    inputs.emplace_back("detections", detections_path);
  } else {
    throw navkit::InvariantViolation("unknown mask mode: " + mode);
  }

  io::save_mask_plan(plan, size, out_path, io::make_provenance(seed, inputs));
  if (!apply_path.empty()) {
    if (out_raster_path.empty()) {
      throw navkit::InvariantViolation("--apply needs --out-raster");
    }
    navkit::Raster image = io::read_raster(apply_path);
    ma::apply_plan(image, plan);
    io::write_raster(image, out_raster_path);
  }
  std::cout << "planned " << plan.boxes.size() << " boxes\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gt_path,
                 const std::string& out_path, const std::string& paths_path,
                 std::uint64_t window, bool majority, std::uint64_t seed) {
  namespace io = navkit::dataset_io;
  namespace nm = navkit::nav_metrics;

  const auto pred = io::load_labels(pred_path);
  const auto gt = io::load_labels(gt_path);
  const nm::EvaluationReport report = nm::evaluate(pred, gt);

  json doc = io::report_to_json(report);
  doc["schema_version"] = 1;
  doc["provenance"] =
      io::make_provenance(seed, {{"pred", pred_path}, {"gt", gt_path}});

  if (!paths_path.empty()) {
    const auto paths = io::load_paths(paths_path);
    if (paths.empty()) {
      throw navkit::InvariantViolation("paths document lists no paths");
    }
    const auto windows = nm::slice_key_moments(gt, paths.front(), window);
    const nm::KeyMomentReport key_moments =
        nm::evaluate_key_moments(pred, gt, windows, majority);
    doc["key_moments"] = {
        {"intersection_accuracy", key_moments.intersection_accuracy},
        {"turn_around_accuracy", key_moments.turn_around_accuracy},
        {"intersection_windows", key_moments.intersection_windows},
        {"turn_around_windows", key_moments.turn_around_windows},
        {"majority_vote", majority}};
  }
  io::write_json_file(out_path, doc);

  std::cout << "accuracy " << report.accuracy << "\n"
            << "f1_binary " << report.f1_binary
            << (report.f1_binary_degenerate ? " (degenerate)" : "") << "\n"
            << "f1_macro_turns " << report.f1_macro_turns << "\n"
            << "mean_angle_error_deg " << report.mean_angle_error_deg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navkit: vision-only indoor navigation data toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML file");

  std::uint64_t seed = 0;

  auto* simulate = app.add_subcommand(
      "simulate", "Render a synthetic corridor episode (depth, flow, yaw)");
  std::string scenario = "five-turns";
  std::string scene_path, trajectory_path, out_dir;
  std::uint32_t side = 65;
  double focal = 64.0, fps = 30.0;
  simulate->add_option("--scenario", scenario, "straight | l-turn | five-turns");
  simulate->add_option("--scene", scene_path, "scene plan file (with --trajectory)");
  simulate->add_option("--trajectory", trajectory_path, "trajectory JSON file");
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--side", side, "square image side in pixels");
  simulate->add_option("--focal", focal, "focal length in pixels");
  simulate->add_option("--fps", fps, "frames per second");
  simulate->add_option("--seed", seed, "seed recorded in provenance");

  auto* estimate = app.add_subcommand(
      "estimate", "Recover per-frame camera yaw from flow and depth rasters");
  std::string manifest_path, intrinsics_path, out_path;
  int samples = 200;
  bool residual_report = false;
  estimate->add_option("--manifest", manifest_path, "episode manifest")->required();
  estimate->add_option("--intrinsics", intrinsics_path, "override intrinsics JSON");
  estimate->add_option("--out", out_path, "output yaw series JSON")->required();
  estimate->add_option("--samples", samples, "pixels sampled per frame");
  estimate->add_option("--seed", seed, "pixel sampling seed");
  estimate->add_flag("--residuals", residual_report,
                     "include per-frame rms residuals");

  auto* label = app.add_subcommand(
      "label", "Discretize a yaw series into 8 direction classes");
  std::string yaw_path, weights_path, mode = "heading";
  int window = 15, lookahead = 0;
  label->add_option("--yaw", yaw_path, "input yaw series JSON")->required();
  label->add_option("--out", out_path, "output label JSON")->required();
  label->add_option("--weights-out", weights_path,
                    "also write class-rebalancing sampling weights");
  label->add_option("--window", window, "smoothing window (odd frames)");
  label->add_option("--lookahead", lookahead,
                    "lookahead horizon in frames (default 2 seconds)");
  label->add_option("--mode", mode, "heading | rate");
  label->add_option("--seed", seed, "seed recorded in provenance");

  auto* genpaths = app.add_subcommand(
      "genpaths", "Recombine annotated map segments into synthetic paths");
  std::string map_path;
  int count = 1;
  bool coverage_report = false;
  genpaths->add_option("--map", map_path, "topological map file")->required();
  genpaths->add_option("--count", count, "number of paths to generate");
  genpaths->add_option("--seed", seed, "start/goal sampling seed");
  genpaths->add_option("--out", out_path, "output paths JSON");
  genpaths->add_flag("--coverage-report", coverage_report,
                     "list triplets missing from the annotations");

  auto* mask = app.add_subcommand(
      "mask", "Generate masking-augmentation plans and curriculum weights");
  std::string mask_mode = "rand";
  std::uint32_t width = 128, height = 128;
  int box_count = 3;
  double min_frac = 0.1, max_frac = 0.3, hard_fraction = 0.8;
  std::string attention_path, detections_path, flags_path, apply_path,
      out_raster_path;
  mask->add_option("--mode", mask_mode, "rand | grad | people | curriculum");
  mask->add_option("--width", width, "image width");
  mask->add_option("--height", height, "image height");
  mask->add_option("--count", box_count, "number of boxes");
  mask->add_option("--min-frac", min_frac, "min box side as an image fraction");
  mask->add_option("--max-frac", max_frac, "max box side as an image fraction");
  mask->add_option("--seed", seed, "sampling seed");
  mask->add_option("--attention", attention_path, "attention raster (grad mode)");
  mask->add_option("--detections", detections_path,
                   "person boxes JSON (people mode)");
  mask->add_option("--flags", flags_path, "error flags JSON (curriculum mode)");
  mask->add_option("--hard-fraction", hard_fraction,
                   "total weight on hard examples");
  mask->add_option("--out", out_path, "output plan/weights JSON")->required();
  mask->add_option("--apply", apply_path, "raster to mask with the plan");
  mask->add_option("--out-raster", out_raster_path, "masked raster output");

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score predicted direction labels against ground truth");
  std::string pred_path, gt_path, paths_path;
  std::uint64_t key_window = 60;
  bool majority = false;
  evaluate->add_option("--pred", pred_path, "predicted labels JSON")->required();
  evaluate->add_option("--gt", gt_path, "ground-truth labels JSON")->required();
  evaluate->add_option("--out", out_path, "output report JSON")->required();
  evaluate->add_option("--paths", paths_path,
                       "synthetic path JSON for key-moment slicing");
  evaluate->add_option("--window", key_window, "intersection window frames");
  evaluate->add_flag("--majority", majority,
                     "score key-moment windows by majority vote");
  evaluate->add_option("--seed", seed, "seed recorded in provenance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    emit_error_record("UsageError", 2, error.what());
    return 2;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(scenario, scene_path, trajectory_path, out_dir, side,
                          focal, fps, seed);
    }
    if (estimate->parsed()) {
      return cmd_estimate(manifest_path, intrinsics_path, out_path, samples,
                          seed, residual_report);
    }
    if (label->parsed()) {
      return cmd_label(yaw_path, out_path, weights_path, window, lookahead,
                       mode, seed);
    }
    if (genpaths->parsed()) {
      return cmd_genpaths(map_path, count, seed, out_path, coverage_report);
    }
    if (mask->parsed()) {
      return cmd_mask(mask_mode, width, height, box_count, min_frac, max_frac,
                      seed, attention_path, detections_path, flags_path,
                      hard_fraction, out_path, apply_path, out_raster_path);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(pred_path, gt_path, out_path, paths_path, key_window,
                          majority, seed);
    }
  } catch (const navkit::Error& error) {
    emit_error_record(error.name(), error.exit_code(), error.what());
    return error.exit_code();
  } catch (const std::exception& error) {
    emit_error_record("Unexpected", 20, error.what());
    return 20;
  }
  return 0;
}
