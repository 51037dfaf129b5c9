#pragma once

// Camera pose value types and rigid-transform helpers.
//
// Extrinsics always carry an explicit convention tag. Consumers that need a
// particular direction convert with `to_convention`; nothing here guesses.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "raytraj/errors.hpp"

namespace raytraj {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kOrthonormalTolerance = 1e-6;
inline constexpr double kUnitAxisTolerance = 1e-6;

enum class Convention { WorldToCamera, CameraToWorld };

inline Convention opposite(Convention c) {
  return c == Convention::WorldToCamera ? Convention::CameraToWorld : Convention::WorldToCamera;
}

inline const char* to_string(Convention c) {
  return c == Convention::WorldToCamera ? "world_to_camera" : "camera_to_world";
}

/// Pinhole intrinsics in pixels.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  [[nodiscard]] Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

inline void validate(const Intrinsics& k) {
  if (!(std::isfinite(k.fx) && std::isfinite(k.fy) && std::isfinite(k.cx) && std::isfinite(k.cy))) {
    throw Error(Errc::InvalidIntrinsics, "non-finite intrinsics");
  }
  if (!(k.fx > 0.0 && k.fy > 0.0)) {
    throw Error(Errc::InvalidIntrinsics, "focal lengths must be positive");
  }
}

/// Largest absolute entry of R^T R - I.
inline double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

inline bool is_rotation(const Mat3& r, double tol = kOrthonormalTolerance) {
  return r.allFinite() && orthonormality_error(r) < tol && std::abs(r.determinant() - 1.0) < tol;
}

/// Nearest rotation matrix in the Frobenius sense. This is the explicit repair
/// for slightly drifted input; validated constructors never call it.
inline Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

/// Rigid transform E = [R | t] tagged with the direction it maps.
class Extrinsics {
 public:
  Extrinsics() = default;

  Extrinsics(const Mat3& rotation, const Vec3& translation, Convention convention)
      : rotation_(rotation), translation_(translation), convention_(convention) {
    if (!is_rotation(rotation_)) {
      throw Error(Errc::InvalidRotation,
                  "rotation is not orthonormal with det 1 (max |R^T R - I| = " +
                      std::to_string(orthonormality_error(rotation_)) + ")");
    }
    if (!translation_.allFinite()) throw Error(Errc::InvalidRotation, "non-finite translation");
  }

  static Extrinsics identity(Convention c = Convention::WorldToCamera) {
    return Extrinsics(Mat3::Identity(), Vec3::Zero(), c);
  }

  [[nodiscard]] const Mat3& rotation() const { return rotation_; }
  [[nodiscard]] const Vec3& translation() const { return translation_; }
  [[nodiscard]] Convention convention() const { return convention_; }

  [[nodiscard]] Mat4 homogeneous() const {
    Mat4 h = Mat4::Identity();
    h.topLeftCorner<3, 3>() = rotation_;
    h.topRightCorner<3, 1>() = translation_;
    return h;
  }

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
  Convention convention_ = Convention::WorldToCamera;
};

struct CameraPose {
  Intrinsics intrinsics;
  Extrinsics extrinsics;
};

/// Ordered poses sharing one convention, rendered at width x height pixels.
class Trajectory {
 public:
  Trajectory(std::vector<CameraPose> poses, int width, int height)
      : poses_(std::move(poses)), width_(width), height_(height) {
    if (poses_.empty()) throw Error(Errc::InvalidTrajectory, "trajectory needs at least one pose");
    if (width_ < 1 || height_ < 1) throw Error(Errc::InvalidTrajectory, "image dimensions must be >= 1");
    const Convention c = poses_.front().extrinsics.convention();
    for (const auto& p : poses_) {
      validate(p.intrinsics);
      if (p.extrinsics.convention() != c) {
        throw Error(Errc::ConventionMismatch, "poses mix extrinsics conventions");
      }
    }
  }

  [[nodiscard]] const std::vector<CameraPose>& poses() const { return poses_; }
  [[nodiscard]] const CameraPose& operator[](std::size_t i) const { return poses_[i]; }
  [[nodiscard]] std::size_t size() const { return poses_.size(); }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] Convention convention() const { return poses_.front().extrinsics.convention(); }

 private:
  std::vector<CameraPose> poses_;
  int width_;
  int height_;
};

/// Inverse rigid transform; the convention tag flips with it.
inline Extrinsics invert_extrinsics(const Extrinsics& e) {
  const Mat3 rt = e.rotation().transpose();
  return Extrinsics(rt, -rt * e.translation(), opposite(e.convention()));
}

/// Inverse rigid transform keeping the convention tag (the transform that
/// undoes `e` when composed in the same frame family).
inline Extrinsics inverse(const Extrinsics& e) {
  const Mat3 rt = e.rotation().transpose();
  return Extrinsics(rt, -rt * e.translation(), e.convention());
}

inline Extrinsics to_convention(const Extrinsics& e, Convention c) {
  return e.convention() == c ? e : invert_extrinsics(e);
}

/// a * b: applies b first, then a.
inline Extrinsics compose(const Extrinsics& a, const Extrinsics& b) {
  if (a.convention() != b.convention()) {
    throw Error(Errc::ConventionMismatch, "compose requires matching conventions");
  }
  return Extrinsics(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation(),
                    a.convention());
}

inline Trajectory to_convention(const Trajectory& traj, Convention c) {
  std::vector<CameraPose> poses;
  poses.reserve(traj.size());
  for (const auto& p : traj.poses()) poses.push_back({p.intrinsics, to_convention(p.extrinsics, c)});
  return Trajectory(std::move(poses), traj.width(), traj.height());
}

/// Re-expresses every pose relative to frame 0 so that frame 0 becomes the
/// identity. With world-to-camera extrinsics E_i the result is E_i * E_0^-1.
/// Camera-to-world input is converted, relativized, and converted back.
inline Trajectory relativize(const Trajectory& traj) {
  const Convention original = traj.convention();
  const Extrinsics e0_inv = inverse(to_convention(traj[0].extrinsics, Convention::WorldToCamera));

  std::vector<CameraPose> poses;
  poses.reserve(traj.size());
  poses.push_back({traj[0].intrinsics, Extrinsics::identity(original)});
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const Extrinsics w2c = to_convention(traj[i].extrinsics, Convention::WorldToCamera);
    poses.push_back({traj[i].intrinsics, to_convention(compose(w2c, e0_inv), original)});
  }
  return Trajectory(std::move(poses), traj.width(), traj.height());
}

/// Rodrigues rotation about a unit axis (radians).
inline Mat3 rotation_about_axis(const Vec3& axis, double angle) {
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > kUnitAxisTolerance) {
    throw Error(Errc::NonUnitAxis, "rotation axis must have unit length");
  }
  if (!std::isfinite(angle)) throw Error(Errc::InvalidArgument, "rotation angle must be finite");
  Mat3 k;
  k << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

inline double degrees_to_radians(double deg) { return deg * (M_PI / 180.0); }
inline double radians_to_degrees(double rad) { return rad * (180.0 / M_PI); }

/// World-space camera center.
inline Vec3 camera_center(const Extrinsics& e) {
  if (e.convention() == Convention::CameraToWorld) return e.translation();
  return -e.rotation().transpose() * e.translation();
}

inline Vec3 camera_center(const CameraPose& pose) { return camera_center(pose.extrinsics); }

}  // namespace raytraj
