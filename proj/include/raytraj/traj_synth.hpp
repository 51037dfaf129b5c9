#pragma once

// Camera trajectory synthesis. Every synthesized trajectory is expressed in
// camera-to-world form with frame 0 at the identity, so it can be fed to the
// metrics directly as a relative trajectory.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/geometry.hpp"

namespace raytraj::synth {

/// Translation along a fixed unit direction, `interval` scene units per frame.
/// A zoom is a pan along the optical axis (0, 0, +-1).
struct PanMotion {
  Vec3 direction = Vec3::UnitX();
  double interval = 0.0;
};

/// Uniform in-place rotation reaching `total_radians` at the last frame. A
/// positive `orbit_radius` instead orbits a pivot that sits that far in front
/// of the first camera.
struct RotateMotion {
  Vec3 axis = Vec3::UnitY();
  double total_radians = 0.0;
  double orbit_radius = 0.0;
};

/// Principal point moves by (dx, dy) pixels per frame.
struct PrincipalShiftMotion {
  double dx = 0.0;
  double dy = 0.0;
};

/// Focal lengths multiply by `scale` per frame.
struct FocalZoomMotion {
  double scale = 1.0;
};

using MotionDirective = std::variant<PanMotion, RotateMotion, PrincipalShiftMotion, FocalZoomMotion>;

enum class MotionKind { Pan, Rotate, PrincipalShift, FocalZoom };

inline MotionKind kind_of(const MotionDirective& m) { return static_cast<MotionKind>(m.index()); }

/// Validated synthesis request, usually parsed from a JSON trajectory spec.
struct SynthesisPlan {
  int frames = 1;
  int width = 1;
  int height = 1;
  Intrinsics intrinsics;
  std::vector<MotionDirective> motions;
};

namespace detail {

inline void check_common(int n, const Intrinsics& intr, int width, int height) {
  if (n < 1) throw Error(Errc::InvalidArgument, "frame count must be >= 1");
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "image dimensions must be >= 1");
  validate(intr);
}

inline void check(const PanMotion& m) {
  if (!m.direction.allFinite() || std::abs(m.direction.norm() - 1.0) > kUnitAxisTolerance) {
    throw Error(Errc::NonUnitDirection, "pan direction must have unit length");
  }
  if (!std::isfinite(m.interval)) throw Error(Errc::InvalidArgument, "pan interval must be finite");
}

inline void check(const RotateMotion& m, int n) {
  if (!m.axis.allFinite() || std::abs(m.axis.norm() - 1.0) > kUnitAxisTolerance) {
    throw Error(Errc::NonUnitAxis, "rotation axis must have unit length");
  }
  if (!std::isfinite(m.total_radians) || !std::isfinite(m.orbit_radius)) {
    throw Error(Errc::InvalidArgument, "rotation parameters must be finite");
  }
  if (m.orbit_radius < 0.0) throw Error(Errc::InvalidArgument, "orbit radius must be >= 0");
  if (n < 2 && m.total_radians != 0.0) {
    throw Error(Errc::InvalidArgument, "a nonzero rotation needs at least two frames");
  }
}

inline void check(const PrincipalShiftMotion& m) {
  if (!std::isfinite(m.dx) || !std::isfinite(m.dy)) {
    throw Error(Errc::InvalidArgument, "principal point shift must be finite");
  }
}

inline void check(const FocalZoomMotion& m) {
  if (!std::isfinite(m.scale) || !(m.scale > 0.0)) {
    throw Error(Errc::NonPositiveScale, "focal zoom scale must be positive");
  }
}

inline void check(const MotionDirective& m, int n) {
  std::visit(
      [n](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, RotateMotion>) {
          check(d, n);
        } else {
          check(d);
        }
      },
      m);
}

// Rotation angle at frame i; exactly linear in i.
inline double rotation_angle(const RotateMotion& m, std::size_t i, int n) {
  if (n < 2) return 0.0;
  return m.total_radians * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Camera-to-world transform contributed by one directive at frame i.
inline Extrinsics frame_transform(const MotionDirective& m, std::size_t i, int n) {
  const auto c2w = Convention::CameraToWorld;
  if (const auto* pan = std::get_if<PanMotion>(&m)) {
    return Extrinsics(Mat3::Identity(), static_cast<double>(i) * pan->interval * pan->direction, c2w);
  }
  if (const auto* rot = std::get_if<RotateMotion>(&m)) {
    const Mat3 r = rotation_about_axis(rot->axis, rotation_angle(*rot, i, n));
    if (rot->orbit_radius > 0.0) {
      const Vec3 pivot(0.0, 0.0, rot->orbit_radius);
      return Extrinsics(r, pivot - r * pivot, c2w);
    }
    return Extrinsics(r, Vec3::Zero(), c2w);
  }
  return Extrinsics::identity(c2w);
}

inline void apply_intrinsics(const MotionDirective& m, std::size_t i, Intrinsics& k) {
  const double step = static_cast<double>(i);
  if (const auto* shift = std::get_if<PrincipalShiftMotion>(&m)) {
    k.cx += step * shift->dx;
    k.cy += step * shift->dy;
  } else if (const auto* zoom = std::get_if<FocalZoomMotion>(&m)) {
    const double f = std::pow(zoom->scale, step);
    k.fx *= f;
    k.fy *= f;
  }
}

}  // namespace detail

/// Per frame i the extrinsics are M_k(i) * ... * M_1(i), i.e. directives are
/// applied in list order; intrinsic directives shift or scale the base
/// intrinsics in the same order.
inline Trajectory compose_motions(const std::vector<MotionDirective>& directives, int n,
                                  const Intrinsics& intr, int width, int height) {
  if (directives.empty()) throw Error(Errc::EmptyDirectives, "at least one motion directive is required");
  detail::check_common(n, intr, width, height);
  for (const auto& d : directives) detail::check(d, n);

  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    Extrinsics acc = Extrinsics::identity(Convention::CameraToWorld);
    Intrinsics k = intr;
    for (const auto& d : directives) {
      acc = compose(detail::frame_transform(d, i, n), acc);
      detail::apply_intrinsics(d, i, k);
    }
    validate(k);
    poses.push_back({k, acc});
  }
  return Trajectory(std::move(poses), width, height);
}

inline Trajectory synth_pan(const Vec3& direction, double interval, int n, const Intrinsics& intr, int width,
                            int height) {
  return compose_motions({PanMotion{direction, interval}}, n, intr, width, height);
}

/// Uniform rotation: frame i is rotated by i * total / (n - 1) radians.
inline Trajectory synth_rotation(const Vec3& axis, double total_radians, int n, const Intrinsics& intr,
                                 int width, int height, double orbit_radius = 0.0) {
  return compose_motions({RotateMotion{axis, total_radians, orbit_radius}}, n, intr, width, height);
}

/// Fixed identity extrinsics, with the principal point or focal length varying.
inline Trajectory synth_intrinsic_motion(const MotionDirective& motion, int n, const Intrinsics& base,
                                         int width, int height) {
  const MotionKind kind = kind_of(motion);
  if (kind != MotionKind::PrincipalShift && kind != MotionKind::FocalZoom) {
    throw Error(Errc::InvalidArgument, "intrinsic motion must be a principal shift or focal zoom");
  }
  return compose_motions({motion}, n, base, width, height);
}

inline Trajectory synthesize(const SynthesisPlan& plan) {
  return compose_motions(plan.motions, plan.frames, plan.intrinsics, plan.width, plan.height);
}

/// Scales every camera center about frame 0's center by k; rotations and
/// intrinsics are untouched.
inline Trajectory scale_intensity(const Trajectory& traj, double k) {
  if (!std::isfinite(k)) throw Error(Errc::InvalidArgument, "intensity factor must be finite");
  const Vec3 origin = camera_center(traj[0]);
  std::vector<CameraPose> poses;
  poses.reserve(traj.size());
  for (const auto& p : traj.poses()) {
    const Extrinsics& e = p.extrinsics;
    const Vec3 center = origin + k * (camera_center(e) - origin);
    const Vec3 t = e.convention() == Convention::CameraToWorld ? center : Vec3(-e.rotation() * center);
    poses.push_back({p.intrinsics, Extrinsics(e.rotation(), t, e.convention())});
  }
  return Trajectory(std::move(poses), traj.width(), traj.height());
}

}  // namespace raytraj::synth
