// Command-line driver: odometry runs, trajectory evaluation, plot tables and
// synthetic sequences.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include "elo/pipeline.hpp"
#include "elo/synth.hpp"

namespace {

elo::SceneSpec scene_by_name(const std::string& name) {
  if (name == "corridor") return elo::corridor_scene();
  if (name == "street") return elo::street_scene();
  if (name == "ground") return elo::ground_only_scene();
  return elo::load_scene(name);
}

void write_synthetic_sequence(const std::filesystem::path& dir, const elo::SceneSpec& scene,
                              int frames, double step, double yaw_deg, std::uint64_t seed) {
  namespace fs = std::filesystem;
  const fs::path velodyne = dir / "velodyne";
  fs::create_directories(velodyne);
  const auto poses =
      elo::constant_motion(elo::Se3Pose::identity(),
                           elo::planar_step(step, elo::deg2rad(yaw_deg)), frames);
  std::ofstream times(dir / "times.txt");
  for (int i = 0; i < frames; ++i) {
    elo::SimulatedScan s =
        elo::simulate_scan(scene, poses[static_cast<std::size_t>(i)], {}, seed + i);
    s.scan.index = i;
    char name[16];
    std::snprintf(name, sizeof(name), "%06d.bin", i);
    elo::write_scan(s.scan, velodyne / name);
    times << elo::format_number(i * elo::kKittiFramePeriod) << '\n';
  }
  elo::write_poses(poses, dir / "poses.txt");
  // Simulated beams need no elevation correction.
  std::ofstream cfg(dir / "elo.cfg");
  cfg << "calib_angle_deg = 0\n";
  std::ofstream scene_file(dir / "scene.txt");
  elo::write_scene(scene, scene_file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-image LiDAR odometry"};
  app.require_subcommand(1);

  elo::RunConfig run_cfg;
  std::string mode;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Estimate the trajectory of a scan directory");
  run->add_option("--mode", mode, "frame-to-model or frame-to-frame")
      ->check(CLI::IsMember({"frame-to-model", "frame-to-frame"}));
  run->add_option("--scans", run_cfg.scans, "Directory of KITTI .bin scans")->required();
  run->add_option("--gt", run_cfg.ground_truth, "Ground-truth pose file");
  run->add_option("--out", run_cfg.output, "Output pose file")->capture_default_str();
  run->add_option("--config", run_cfg.config, "key=value configuration file");
  run->add_flag("--timing", run_cfg.timing, "Print mean per-stage timings");
  run->add_option("--plot-data", run_cfg.plot_data, "Write an x/y trajectory table");
  run->add_flag("--quiet", quiet, "Suppress warnings");

  std::filesystem::path est_path;
  std::filesystem::path gt_path;
  int stride = 1;
  bool kv = false;
  auto* eval = app.add_subcommand("eval", "Relative errors of a trajectory");
  eval->add_option("estimate", est_path, "Estimated pose file")->required();
  eval->add_option("ground_truth", gt_path, "Ground-truth pose file")->required();
  eval->add_option("--stride", stride, "Frames between segment starts")->capture_default_str();
  eval->add_flag("--kv", kv, "Machine-readable key=value output");

  std::filesystem::path plot_in;
  std::optional<std::filesystem::path> plot_out;
  auto* plot = app.add_subcommand("plot", "x/y table of a pose file");
  plot->add_option("poses", plot_in, "Pose file")->required();
  plot->add_option("--out", plot_out, "Output file (default stdout)");

  std::string scene = "corridor";
  std::filesystem::path synth_out;
  int frames = 50;
  double step = 0.5;
  double yaw = 0.2;
  double noise = 0.0;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a simulated scan sequence");
  synth->add_option("--scene", scene, "corridor, street, ground or a scene file")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--frames", frames, "Number of frames")->capture_default_str();
  synth->add_option("--step", step, "Forward motion per frame, meters")->capture_default_str();
  synth->add_option("--yaw-deg", yaw, "Yaw per frame, degrees")->capture_default_str();
  synth->add_option("--noise", noise, "Range noise sigma, meters")->capture_default_str();
  synth->add_option("--seed", seed, "Noise seed")->capture_default_str();

  auto* defaults = app.add_subcommand("config", "Print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!mode.empty()) run_cfg.mode = elo::parse_mode(mode);
      elo::run(run_cfg, std::cout, quiet ? nullptr : &std::cerr);
    } else if (*eval) {
      elo::EvalConfig cfg;
      cfg.stride = stride;
      const auto errors = elo::evaluate(elo::read_poses(est_path), elo::read_poses(gt_path), cfg);
      if (kv) {
        elo::write_report_kv(errors, std::cout);
      } else {
        elo::write_report(errors, std::cout);
      }
    } else if (*plot) {
      if (plot_out) {
        std::ofstream out(*plot_out);
        if (!out) throw std::runtime_error("cannot write " + plot_out->string());
        elo::dump_plot_data(plot_in, out);
      } else {
        elo::dump_plot_data(plot_in, std::cout);
      }
    } else if (*synth) {
      if (frames < 1) throw std::invalid_argument("--frames must be positive");
      elo::SceneSpec spec = scene_by_name(scene);
      if (noise > 0.0) spec.noise = noise;
      write_synthetic_sequence(synth_out, spec, frames, step, yaw, seed);
    } else if (*defaults) {
      elo::write_config(elo::OdometryConfig{}, std::cout);
    }
  } catch (const elo::RunError& e) {
    std::cerr << "error";
    if (e.frame() >= 0) std::cerr << " (frame " << e.frame() << ")";
    std::cerr << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
