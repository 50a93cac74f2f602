#include "elo/eval.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace elo {

std::vector<double> path_distances(std::span<const Se3Pose> poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    dist[i] = dist[i - 1] + (poses[i].translation - poses[i - 1].translation).norm();
  }
  return dist;
}

RelErrors evaluate(std::span<const Se3Pose> est, std::span<const Se3Pose> gt,
                   const EvalConfig& cfg) {
  if (est.size() != gt.size()) throw std::invalid_argument("trajectories differ in length");
  if (gt.size() < 2) throw std::invalid_argument("evaluation needs at least two poses");
  if (cfg.stride < 1) throw std::invalid_argument("stride must be positive");

  const std::vector<double> dist = path_distances(gt);
  RelErrors out;
  double t_sum = 0.0;
  double r_sum = 0.0;
  for (double length : cfg.lengths) {
    SegmentError seg;
    seg.length = length;
    double t_acc = 0.0;
    double r_acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); i += static_cast<std::size_t>(cfg.stride)) {
      // First frame farther than `length` along the ground-truth path.
      std::size_t j = i;
      while (j < gt.size() && dist[j] <= dist[i] + length) ++j;
      if (j >= gt.size()) break;
      const Se3Pose delta_gt = inverse(gt[i]) * gt[j];
      const Se3Pose delta_est = inverse(est[i]) * est[j];
      const Se3Pose err = inverse(delta_gt) * delta_est;
      t_acc += err.translation.norm() / length;
      r_acc += rotation_angle(err.rotation) / length;
      ++seg.count;
    }
    if (seg.count > 0) {
      seg.t_rel = 100.0 * t_acc / static_cast<double>(seg.count);
      seg.r_rel = 100.0 * rad2deg(r_acc / static_cast<double>(seg.count));
      t_sum += t_acc;
      r_sum += r_acc;
      out.segments += seg.count;
    }
    out.per_length.push_back(seg);
  }
  if (out.segments > 0) {
    out.empty = false;
    out.t_rel = 100.0 * t_sum / static_cast<double>(out.segments);
    out.r_rel = 100.0 * rad2deg(r_sum / static_cast<double>(out.segments));
  }
  return out;
}

void write_report(const RelErrors& errors, std::ostream& out) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  if (errors.empty) {
    out << "no segments evaluated (ground truth shorter than the shortest segment)\n";
  } else {
    out << "t_rel " << errors.t_rel << " %\n";
    out << "r_rel " << errors.r_rel << " deg/100m\n";
    out << "segments " << errors.segments << '\n';
  }
  out << "length_m  t_rel_%  r_rel_deg/100m  segments\n";
  for (const SegmentError& s : errors.per_length) {
    out << std::setw(8) << std::setprecision(0) << s.length << "  " << std::setprecision(4)
        << std::setw(7) << s.t_rel << "  " << std::setw(14) << s.r_rel << "  " << s.count << '\n';
  }
  out.flags(flags);
}

void write_report_kv(const RelErrors& errors, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision(10);
  out << "t_rel=" << errors.t_rel << '\n';
  out << "r_rel=" << errors.r_rel << '\n';
  out << "segments=" << errors.segments << '\n';
  out << "empty=" << (errors.empty ? 1 : 0) << '\n';
  for (const SegmentError& s : errors.per_length) {
    out << "length." << static_cast<long>(s.length) << '=' << s.t_rel << ' ' << s.r_rel << ' '
        << s.count << '\n';
  }
  out.precision(precision);
  out.flags(flags);
}

}  // namespace elo
