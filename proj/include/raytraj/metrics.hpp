#pragma once

// Camera trajectory fidelity metrics.
//
//   RotErr   = sum_i arccos((tr(R_gen^i R_gt^i^T) - 1) / 2)
//   TransErr = sum_i || T_gt^i - T_gen^i ||_2^2
//
// `evaluate` first expresses both trajectories relative to their first frame,
// then rescales the generated translations so that the first-to-second frame
// gap matches the ground truth, then computes both sums.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/geometry.hpp"

namespace raytraj::metrics {

/// COLMAP re-estimation lower bounds measured on the RealEstate10K test set:
/// running COLMAP on ground-truth clips and scoring against the dataset poses.
/// Reference values only; nothing in this library reproduces them.
inline constexpr double kRealEstate10kTransErrLowerBound = 6.93;
inline constexpr double kRealEstate10kRotErrLowerBound = 1.02;

/// Baselines shorter than this make the rescale factor undefined.
inline constexpr double kMinBaseline = 1e-8;

struct ErrorSeries {
  double total = 0.0;
  std::vector<double> per_frame;
};

struct AlignmentReport {
  double rot_err_total = 0.0;          // radians
  double trans_err_total = 0.0;        // squared scene units
  double trans_err_unsquared = 0.0;    // scene units, sum of plain L2 distances
  std::vector<double> per_frame_rot;
  std::vector<double> per_frame_trans;
  std::vector<double> per_frame_trans_unsquared;
  double rescale_factor = 1.0;
  std::size_t frames_compared = 0;
};

struct ScaleNormalization {
  Trajectory normalized;
  double rescale_factor;
};

namespace detail {

inline void check_pair(const Trajectory& gt, const Trajectory& gen) {
  if (gt.size() != gen.size()) {
    throw Error(Errc::LengthMismatch, "ground truth has " + std::to_string(gt.size()) +
                                          " frames, generated has " + std::to_string(gen.size()));
  }
  if (gt.convention() != gen.convention()) {
    throw Error(Errc::ConventionMismatch, "trajectories use different extrinsics conventions");
  }
}

inline double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace detail

/// Geodesic angle between two rotations, arccos((tr(R) - 1) / 2) for
/// R = gen * gt^T. Evaluated as atan2(|vee(R - R^T)| / 2, (tr(R) - 1) / 2), which
/// is the same angle but keeps full precision near 0 and pi where arccos does
/// not, and never produces NaN for slightly non-orthonormal input.
inline double rotation_angle_between(const Mat3& gen, const Mat3& gt) {
  const Mat3 r = gen * gt.transpose();
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (r.trace() - 1.0));
}

inline ErrorSeries rot_err(const Trajectory& gt, const Trajectory& gen) {
  detail::check_pair(gt, gen);
  ErrorSeries out;
  out.per_frame.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    out.per_frame.push_back(rotation_angle_between(gen[i].extrinsics.rotation(), gt[i].extrinsics.rotation()));
  }
  out.total = detail::sum(out.per_frame);
  return out;
}

/// Squared Euclidean distance between translation vectors, per frame.
inline ErrorSeries trans_err(const Trajectory& gt, const Trajectory& gen) {
  detail::check_pair(gt, gen);
  ErrorSeries out;
  out.per_frame.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    out.per_frame.push_back((gt[i].extrinsics.translation() - gen[i].extrinsics.translation()).squaredNorm());
  }
  out.total = detail::sum(out.per_frame);
  return out;
}

/// Multiplies every generated translation by |t_gt[1]| / |t_gen[1]|. Both
/// inputs are expected to be relative to their first frame already.
inline ScaleNormalization normalize_scale(const Trajectory& gt, const Trajectory& gen) {
  detail::check_pair(gt, gen);
  if (gt.size() < 2) throw Error(Errc::DegenerateBaseline, "scale normalization needs at least two frames");
  const double gt_gap = gt[1].extrinsics.translation().norm();
  const double gen_gap = gen[1].extrinsics.translation().norm();
  if (gt_gap < kMinBaseline || gen_gap < kMinBaseline) {
    throw Error(Errc::DegenerateBaseline, "first-two-frame translation gap is below 1e-8");
  }
  const double factor = gt_gap / gen_gap;

  std::vector<CameraPose> poses;
  poses.reserve(gen.size());
  for (const auto& p : gen.poses()) {
    const Extrinsics& e = p.extrinsics;
    poses.push_back({p.intrinsics, Extrinsics(e.rotation(), factor * e.translation(), e.convention())});
  }
  return {Trajectory(std::move(poses), gen.width(), gen.height()), factor};
}

/// Full pipeline: world-to-camera, relativize, rescale, then both error sums.
inline AlignmentReport evaluate(const Trajectory& gt, const Trajectory& gen) {
  if (gt.size() != gen.size()) {
    throw Error(Errc::LengthMismatch, "ground truth has " + std::to_string(gt.size()) +
                                          " frames, generated has " + std::to_string(gen.size()));
  }
  const Trajectory gt_rel = relativize(to_convention(gt, Convention::WorldToCamera));
  const Trajectory gen_rel = relativize(to_convention(gen, Convention::WorldToCamera));
  const ScaleNormalization norm = normalize_scale(gt_rel, gen_rel);

  const ErrorSeries rot = rot_err(gt_rel, norm.normalized);
  const ErrorSeries trans = trans_err(gt_rel, norm.normalized);

  AlignmentReport report;
  report.rot_err_total = rot.total;
  report.trans_err_total = trans.total;
  report.per_frame_rot = rot.per_frame;
  report.per_frame_trans = trans.per_frame;
  report.per_frame_trans_unsquared.reserve(trans.per_frame.size());
  for (double sq : trans.per_frame) report.per_frame_trans_unsquared.push_back(std::sqrt(sq));
  report.trans_err_unsquared = detail::sum(report.per_frame_trans_unsquared);
  report.rescale_factor = norm.rescale_factor;
  report.frames_compared = gt.size();
  return report;
}

}  // namespace raytraj::metrics
