#include "elo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace elo {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::optional<int> frame_number(const std::string& stem) {
  if (stem.empty() || stem.size() > 9) return std::nullopt;
  if (!std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(stem);
}

std::vector<double> frame_times(const std::filesystem::path& dir,
                                const std::vector<ScanFile>& files) {
  for (const auto& candidate : {dir / "times.txt", dir.parent_path() / "times.txt"}) {
    if (!std::filesystem::is_regular_file(candidate)) continue;
    const std::vector<double> all = read_times(candidate);
    std::vector<double> times;
    for (const ScanFile& f : files) {
      if (static_cast<std::size_t>(f.index) >= all.size()) {
        throw RunError(candidate.string() + " has no timestamp for frame " +
                           std::to_string(f.index),
                       f.index);
      }
      times.push_back(all[static_cast<std::size_t>(f.index)]);
    }
    return times;
  }
  std::vector<double> times;
  for (const ScanFile& f : files) times.push_back(f.index * kKittiFramePeriod);
  return times;
}

}  // namespace

StageTimes& StageTimes::operator+=(const StageTimes& o) {
  projection += o.projection;
  features += o.features;
  icp += o.icp;
  update += o.update;
  total += o.total;
  return *this;
}

ScanFrame prepare_frame(const RawScan& raw, const OdometryConfig& cfg, StageTimes* times) {
  auto start = Clock::now();
  const RawScan corrected =
      cfg.calib_angle != 0.0 ? apply_calib_correction(raw, cfg.calib_angle) : raw;
  std::vector<TimedPoint> points;
  points.reserve(corrected.points.size());
  for (const LidarPoint& pt : corrected.points) points.push_back({pt.p, raw.timestamp});
  RangeImage image = build_range_image(points, cfg.spherical);
  if (times != nullptr) times->projection = elapsed_ms(start);

  start = Clock::now();
  ScanFrame frame;
  frame.timestamp = raw.timestamp;
  if (cfg.registration.cost_mode == CostMode::kSphericalOnly) {
    frame.normals = compute_normal_map(image, cfg.normals);
    frame.vertices = std::move(image);
  } else {
    const GroundMask mask = segment_ground(image, cfg.ground);
    GroundSplit split = split_ground(image, mask);
    frame.ground = build_bev_map(split.ground, cfg.bev);
    frame.normals = compute_normal_map(split.non_ground, cfg.normals);
    frame.vertices = std::move(split.non_ground);
  }
  if (times != nullptr) times->features = elapsed_ms(start);
  return frame;
}

Odometry::Odometry(OdometryConfig cfg, std::ostream* log) : cfg_(std::move(cfg)), log_(log) {
  cfg_.normals.sigma_z = cfg_.registration.sigma_z;
  cfg_.validate();
}

const FrameResult& Odometry::process(const RawScan& raw) {
  const auto start = Clock::now();
  StageTimes times;
  ScanFrame frame = prepare_frame(raw, cfg_, &times);

  FrameResult result;
  if (poses_.empty()) {
    result.pose = Se3Pose::identity();
    result.registration.converged = true;
    const auto update_start = Clock::now();
    model_ = ModelState::from_scan(frame);
    times.update = elapsed_ms(update_start);
  } else {
    const std::size_t n = std::min<std::size_t>(poses_.size(), 3);
    const Se3Pose prediction =
        predict_initial(std::span<const Se3Pose>(poses_).subspan(poses_.size() - n));

    const auto icp_start = Clock::now();
    result.registration = register_scan(frame, model_, prediction, cfg_.registration);
    times.icp = elapsed_ms(icp_start);

    result.increment = result.registration.pose;
    if (!result.registration.converged) {
      result.increment = prediction;
      result.fallback = true;
      ++fallbacks_;
      if (log_ != nullptr) {
        *log_ << "warning: frame " << raw.index << " did not converge after "
              << result.registration.iterations << " iterations; using the prediction\n";
      }
    }
    result.pose = poses_.back() * result.increment;
    result.pose.rotation = orthonormalize(result.pose.rotation);

    const auto update_start = Clock::now();
    if (cfg_.mode == OdometryMode::kFrameToModel) {
      model_.update(frame, result.increment, frame.timestamp, cfg_.model);
    } else {
      model_ = ModelState::from_scan(frame);
    }
    times.update = elapsed_ms(update_start);
  }
  times.total = elapsed_ms(start);

  poses_.push_back(result.pose);
  timings_.push_back(times);
  last_ = std::move(result);
  return last_;
}

StageTimes mean_times(const std::vector<StageTimes>& times) {
  StageTimes sum;
  for (const StageTimes& t : times) sum += t;
  if (times.empty()) return sum;
  const double n = static_cast<double>(times.size());
  sum.projection /= n;
  sum.features /= n;
  sum.icp /= n;
  sum.update /= n;
  sum.total /= n;
  return sum;
}

void write_timing_table(const StageTimes& mean, std::size_t frames, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision(3);
  out << std::fixed;
  out << "stage                 mean_ms  (" << frames << " frames)\n";
  out << "Spherical Projection  " << std::setw(8) << mean.projection << '\n';
  out << "Feature Extraction    " << std::setw(8) << mean.features << '\n';
  out << "ICP Optimization      " << std::setw(8) << mean.icp << '\n';
  out << "Model Updating        " << std::setw(8) << mean.update << '\n';
  out << "Total                 " << std::setw(8) << mean.total << '\n';
  out.precision(precision);
  out.flags(flags);
}

std::vector<ScanFile> list_scans(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw RunError("scan directory " + dir.string() + " does not exist", -1);
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  std::vector<ScanFile> files;
  for (const auto& p : paths) {
    const auto index = frame_number(p.stem().string());
    if (!index) throw RunError("scan file " + p.string() + " is not named by frame number", -1);
    if (!files.empty() && *index <= files.back().index) {
      throw RunError("frame indices are not increasing at " + p.filename().string(), *index);
    }
    files.push_back({p, *index});
  }
  if (files.empty()) throw RunError("no scans (*.bin) in " + dir.string(), -1);
  return files;
}

RunSummary run(const RunConfig& cfg, std::ostream& report, std::ostream* log) {
  OdometryConfig odo = cfg.config ? load_config(*cfg.config) : OdometryConfig{};
  if (cfg.mode) odo.mode = *cfg.mode;

  const std::vector<ScanFile> files = list_scans(cfg.scans);
  const std::vector<double> times = frame_times(cfg.scans, files);

  std::vector<Se3Pose> ground_truth;
  if (cfg.ground_truth) {
    ground_truth = read_poses(*cfg.ground_truth);
    if (ground_truth.size() < static_cast<std::size_t>(files.back().index) + 1) {
      throw RunError("ground truth has " + std::to_string(ground_truth.size()) +
                         " poses, fewer than the scanned frames",
                     files.back().index);
    }
  }

  Odometry odometry(odo, log);
  for (std::size_t i = 0; i < files.size(); ++i) {
    RawScan raw;
    try {
      raw = read_scan(files[i].path);
    } catch (const std::exception& e) {
      throw RunError("frame " + std::to_string(files[i].index) + ": " + e.what(),
                     files[i].index);
    }
    raw.index = files[i].index;
    raw.timestamp = times[i];
    odometry.process(raw);
  }

  RunSummary summary;
  summary.poses = odometry.trajectory();
  summary.fallbacks = odometry.fallbacks();
  summary.mean_times = mean_times(odometry.timings());

  // KITTI ground truth is given in the left camera frame.
  const auto calib = cfg.scans.parent_path() / "calib.txt";
  if (std::filesystem::is_regular_file(calib)) {
    const Se3Pose tr = read_velo_to_cam(calib);
    const Se3Pose tr_inv = inverse(tr);
    for (Se3Pose& p : summary.poses) p = tr * p * tr_inv;
  }
  write_poses(summary.poses, cfg.output);

  if (cfg.ground_truth) {
    std::vector<Se3Pose> gt;
    for (const ScanFile& f : files) gt.push_back(ground_truth[static_cast<std::size_t>(f.index)]);
    summary.errors = evaluate(summary.poses, gt);
    write_report(*summary.errors, report);
  }
  if (cfg.timing) write_timing_table(summary.mean_times, files.size(), report);
  if (cfg.plot_data) {
    std::ofstream out(*cfg.plot_data);
    if (!out) throw std::runtime_error("cannot write " + cfg.plot_data->string());
    dump_plot_data(summary.poses, out);
  }
  if (summary.fallbacks > 0 && log != nullptr) {
    *log << "warning: " << summary.fallbacks << " frame(s) fell back to the prediction\n";
  }
  return summary;
}

void dump_plot_data(const std::vector<Se3Pose>& poses, std::ostream& out) {
  for (const Se3Pose& p : poses) {
    out << format_number(p.translation.x()) << ' ' << format_number(p.translation.y()) << '\n';
  }
}

void dump_plot_data(const std::filesystem::path& pose_file, std::ostream& out) {
  dump_plot_data(read_poses(pose_file), out);
}

}  // namespace elo
