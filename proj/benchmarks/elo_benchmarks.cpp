#include <benchmark/benchmark.h>

#include <vector>

#include "elo/pipeline.hpp"
#include "elo/synth.hpp"

namespace {

using namespace elo;

OdometryConfig bench_config() {
  OdometryConfig cfg;
  cfg.calib_angle = 0.0;
  return cfg;
}

std::vector<TimedPoint> street_points(const Se3Pose& pose = {}) {
  SceneSpec scene = street_scene();
  scene.noise = 0.01;
  const SimulatedScan sim = simulate_scan(scene, pose, {}, 3);
  std::vector<TimedPoint> out;
  out.reserve(sim.scan.points.size());
  for (const LidarPoint& p : sim.scan.points) out.push_back({p.p, 0.0});
  return out;
}

RawScan street_scan(const Se3Pose& pose, int index) {
  SceneSpec scene = street_scene();
  scene.noise = 0.01;
  RawScan scan = simulate_scan(scene, pose, {}, 3 + index).scan;
  scan.index = index;
  scan.timestamp = 0.1 * index;
  return scan;
}

void BM_BuildRangeImage(benchmark::State& state) {
  const auto points = street_points();
  const SphericalConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_range_image(points, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(points.size()));
}
BENCHMARK(BM_BuildRangeImage)->Unit(benchmark::kMillisecond);

void BM_SegmentGround(benchmark::State& state) {
  const RangeImage img = build_range_image(street_points(), SphericalConfig{});
  const GroundSegConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(segment_ground(img, cfg));
}
BENCHMARK(BM_SegmentGround)->Unit(benchmark::kMillisecond);

// Arg: 0 range-adaptive, 1 fixed window, 2 cross product.
void BM_NormalMap(benchmark::State& state) {
  const RangeImage img = build_range_image(street_points(), SphericalConfig{});
  WindowLimits cfg;
  cfg.mode = static_cast<NormalMode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_normal_map(img, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(img.valid_count()));
}
BENCHMARK(BM_NormalMap)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_RegisterScan(benchmark::State& state) {
  const OdometryConfig cfg = bench_config();
  const Se3Pose step = planar_step(0.8, deg2rad(0.5));
  const ModelState model = ModelState::from_scan(prepare_frame(street_scan({}, 0), cfg));
  const ScanFrame frame = prepare_frame(street_scan(step, 1), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(register_scan(frame, model, Se3Pose::identity(), cfg.registration));
  }
}
BENCHMARK(BM_RegisterScan)->Unit(benchmark::kMillisecond);

void BM_ModelUpdate(benchmark::State& state) {
  const OdometryConfig cfg = bench_config();
  const Se3Pose step = planar_step(0.8, deg2rad(0.5));
  const ModelState seed = ModelState::from_scan(prepare_frame(street_scan({}, 0), cfg));
  const ScanFrame frame = prepare_frame(street_scan(step, 1), cfg);
  for (auto _ : state) {
    state.PauseTiming();
    ModelState model = seed;
    state.ResumeTiming();
    model.update(frame, step, frame.timestamp, cfg.model);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_ModelUpdate)->Unit(benchmark::kMillisecond);

void BM_ProcessFrame(benchmark::State& state) {
  const OdometryConfig cfg = bench_config();
  const auto poses = constant_motion({}, planar_step(0.8, deg2rad(0.5)), 3);
  std::vector<RawScan> scans;
  for (int i = 0; i < 3; ++i) scans.push_back(street_scan(poses[i], i));
  for (auto _ : state) {
    state.PauseTiming();
    Odometry odo(cfg);
    odo.process(scans[0]);
    odo.process(scans[1]);
    state.ResumeTiming();
    benchmark::DoNotOptimize(odo.process(scans[2]));
  }
}
BENCHMARK(BM_ProcessFrame)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
