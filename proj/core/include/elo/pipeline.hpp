#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elo/config.hpp"
#include "elo/eval.hpp"
#include "elo/io_kitti.hpp"

namespace elo {

/// Per-frame wall-clock milliseconds.
struct StageTimes {
  double projection = 0.0;  // calibration correction + range image
  double features = 0.0;    // ground segmentation, BEV map, normals
  double icp = 0.0;
  double update = 0.0;
  double total = 0.0;

  StageTimes& operator+=(const StageTimes& o);
};

/// Feature maps of one raw scan, stamped with the scan's timestamp.
ScanFrame prepare_frame(const RawScan& raw, const OdometryConfig& cfg,
                        StageTimes* times = nullptr);

struct FrameResult {
  Se3Pose increment;  // T^{t-1}_t
  Se3Pose pose;       // frame-to-world
  RegistrationResult registration;
  bool fallback = false;
};

class Odometry {
 public:
  explicit Odometry(OdometryConfig cfg, std::ostream* log = nullptr);

  const FrameResult& process(const RawScan& raw);

  const std::vector<Se3Pose>& trajectory() const { return poses_; }
  const std::vector<StageTimes>& timings() const { return timings_; }
  const ModelState& model() const { return model_; }
  const OdometryConfig& config() const { return cfg_; }
  std::size_t fallbacks() const { return fallbacks_; }

 private:
  OdometryConfig cfg_;
  std::ostream* log_;
  ModelState model_;
  std::vector<Se3Pose> poses_;
  std::vector<StageTimes> timings_;
  FrameResult last_;
  std::size_t fallbacks_ = 0;
};

/// Mean of each stage over all frames.
StageTimes mean_times(const std::vector<StageTimes>& times);
void write_timing_table(const StageTimes& mean, std::size_t frames, std::ostream& out);

struct RunConfig {
  std::optional<OdometryMode> mode;  // overrides the config file
  std::filesystem::path scans;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path output = "poses.txt";
  std::optional<std::filesystem::path> config;
  bool timing = false;
  std::optional<std::filesystem::path> plot_data;
};

/// Failure tied to one input frame.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, int frame) : std::runtime_error(what), frame_(frame) {}
  int frame() const { return frame_; }

 private:
  int frame_;
};

struct ScanFile {
  std::filesystem::path path;
  int index = 0;
};

/// *.bin files of a directory in lexicographic order. Throws RunError when a file name
/// is not a frame number or the numbers do not strictly increase.
std::vector<ScanFile> list_scans(const std::filesystem::path& dir);

struct RunSummary {
  std::vector<Se3Pose> poses;
  std::optional<RelErrors> errors;
  StageTimes mean_times;
  std::size_t fallbacks = 0;
};

/// Full odometry run. Writes the pose file and, when requested, evaluation, timing and
/// plot outputs; human-readable reports go to `report`.
RunSummary run(const RunConfig& cfg, std::ostream& report, std::ostream* log = nullptr);

/// Two-column "x y" table of the pose translations.
void dump_plot_data(const std::vector<Se3Pose>& poses, std::ostream& out);
void dump_plot_data(const std::filesystem::path& pose_file, std::ostream& out);

}  // namespace elo
