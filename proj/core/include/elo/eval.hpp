#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "elo/geometry.hpp"

namespace elo {

struct SegmentError {
  double length = 0.0;  // meters
  double t_rel = 0.0;   // percent
  double r_rel = 0.0;   // degrees per 100 m
  std::size_t count = 0;
};

struct RelErrors {
  double t_rel = 0.0;  // percent
  double r_rel = 0.0;  // degrees per 100 m
  std::vector<SegmentError> per_length;
  std::size_t segments = 0;
  /// Set when no segment could be evaluated (ground truth shorter than 100 m).
  bool empty = true;
};

struct EvalConfig {
  std::vector<double> lengths = {100, 200, 300, 400, 500, 600, 700, 800};
  int stride = 1;
};

/// Cumulative arc length of the trajectory translations.
std::vector<double> path_distances(std::span<const Se3Pose> poses);

/// Relative errors over segments of fixed ground-truth arc length, starting at every
/// `stride`-th frame. Throws std::invalid_argument on mismatched or too-short input.
RelErrors evaluate(std::span<const Se3Pose> est, std::span<const Se3Pose> gt,
                   const EvalConfig& cfg = {});

void write_report(const RelErrors& errors, std::ostream& out);
/// "key=value" lines: t_rel, r_rel, segments, then one "length.<L>=t r n" per length.
void write_report_kv(const RelErrors& errors, std::ostream& out);

}  // namespace elo
