#pragma once

// Per-pixel Plücker ray embeddings.
//
// For pixel (u, v) the embedding is (o x d, d), where o is the camera center in
// world space and d the unit world-space direction of the ray through the
// pixel. Poses are converted to camera-to-world form first, so that
// d ~ R_c2w K^-1 [u, v, 1]^T and o = t_c2w; the translation drops out of the
// direction once the center is subtracted.
//
// Maps are float32 tensors of shape (6, h, w) with channels (m_x, m_y, m_z,
// d_x, d_y, d_z); sequences stack them to (n, 6, h, w).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

#include "raytraj/geometry.hpp"
#include "raytraj/tensor.hpp"

namespace raytraj::plucker {

inline constexpr std::size_t kChannels = 6;

/// Where integer pixel coordinates sample the image plane.
enum class PixelOrigin {
  Center,  // ray through (u + 0.5, v + 0.5)
  Corner,  // ray through (u, v)
};

inline double pixel_offset(PixelOrigin origin) { return origin == PixelOrigin::Center ? 0.5 : 0.0; }

/// Unit world-space direction from the camera center through pixel (u, v).
inline Vec3 ray_direction(const CameraPose& pose, double u, double v, PixelOrigin origin = PixelOrigin::Center) {
  const Extrinsics c2w = to_convention(pose.extrinsics, Convention::CameraToWorld);
  const Intrinsics& k = pose.intrinsics;
  const double off = pixel_offset(origin);
  const Vec3 cam((u + off - k.cx) / k.fx, (v + off - k.cy) / k.fy, 1.0);
  return (c2w.rotation() * cam).normalized();
}

struct Ray {
  Vec3 origin;
  Vec3 direction;
};

inline Ray pixel_ray(const CameraPose& pose, double u, double v, PixelOrigin origin = PixelOrigin::Center) {
  return {camera_center(pose), ray_direction(pose, u, v, origin)};
}

/// 6-vector (o x d, d) for a single pixel, in double precision.
inline Eigen::Matrix<double, 6, 1> embedding(const CameraPose& pose, double u, double v,
                                             PixelOrigin origin = PixelOrigin::Center) {
  const Ray r = pixel_ray(pose, u, v, origin);
  Eigen::Matrix<double, 6, 1> p;
  p << r.origin.cross(r.direction), r.direction;
  return p;
}

namespace detail {

// Writes one (6, h, w) frame into `out` (6 * h * w floats).
inline void fill_map(const CameraPose& pose, int width, int height, PixelOrigin origin, float* out) {
  const Extrinsics c2w = to_convention(pose.extrinsics, Convention::CameraToWorld);
  const Mat3& r = c2w.rotation();
  const Vec3 o = c2w.translation();
  const Intrinsics& k = pose.intrinsics;
  const double off = pixel_offset(origin);
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

  for (int v = 0; v < height; ++v) {
    const double y = (v + off - k.cy) / k.fy;
    for (int u = 0; u < width; ++u) {
      const double x = (u + off - k.cx) / k.fx;
      const Vec3 d = (r * Vec3(x, y, 1.0)).normalized();
      const Vec3 m = o.cross(d);
      const std::size_t px = static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u);
      for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>(c) * plane + px] = static_cast<float>(m[c]);
        out[static_cast<std::size_t>(c + 3) * plane + px] = static_cast<float>(d[c]);
      }
    }
  }
}

}  // namespace detail

/// (6, height, width) embedding of one pose.
inline Tensor plucker_map(const CameraPose& pose, int width, int height, PixelOrigin origin = PixelOrigin::Center) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "image dimensions must be >= 1");
  Tensor out({kChannels, static_cast<std::size_t>(height), static_cast<std::size_t>(width)});
  detail::fill_map(pose, width, height, origin, out.data().data());
  return out;
}

/// (n, 6, h, w) embedding of a trajectory. Frames are computed on up to
/// `threads` workers (0 = hardware concurrency); the result does not depend
/// on the schedule.
inline Tensor plucker_sequence(const Trajectory& traj, PixelOrigin origin = PixelOrigin::Center,
                               unsigned threads = 0) {
  const std::size_t n = traj.size();
  const auto h = static_cast<std::size_t>(traj.height());
  const auto w = static_cast<std::size_t>(traj.width());
  Tensor out({n, kChannels, h, w});
  const std::size_t frame_size = kChannels * h * w;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, n);
  auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += workers) {
      detail::fill_map(traj[i], traj.width(), traj.height(), origin, out.data().data() + i * frame_size);
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(run, t);
  }
  return out;
}

/// Left-right mirror of a camera: the image flips about its vertical center
/// line and the world flips about the x = 0 plane. Pairs with flipping the
/// rendered frame for augmentation.
inline CameraPose flip_horizontal(const CameraPose& pose, int width) {
  const Mat3 s = Vec3(-1.0, 1.0, 1.0).asDiagonal();
  const Extrinsics& e = pose.extrinsics;
  Intrinsics k = pose.intrinsics;
  k.cx = static_cast<double>(width) - k.cx;
  return {k, Extrinsics(s * e.rotation() * s, s * e.translation(), e.convention())};
}

/// Worst-case deviations of a (.., 6, h, w) embedding tensor from the Plücker
/// constraints, recomputed in double precision.
struct InvariantReport {
  double max_unit_error = 0.0;        // max | |d| - 1 |
  double max_orthogonality = 0.0;     // max |m . d|
  double max_moment = 0.0;            // max |m|_inf
};

inline InvariantReport check_invariants(const Tensor& t) {
  if (t.rank() < 3 || t.dim(t.rank() - 3) != kChannels) {
    throw Error(Errc::ShapeMismatch, "expected a (..., 6, h, w) tensor, got " + to_string(t.shape()));
  }
  const std::size_t plane = t.dim(t.rank() - 2) * t.dim(t.rank() - 1);
  const std::size_t frames = t.size() / (kChannels * plane);
  InvariantReport rep;
  for (std::size_t f = 0; f < frames; ++f) {
    const float* base = t.data().data() + f * kChannels * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      const Vec3 m(base[p], base[plane + p], base[2 * plane + p]);
      const Vec3 d(base[3 * plane + p], base[4 * plane + p], base[5 * plane + p]);
      rep.max_unit_error = std::max(rep.max_unit_error, std::abs(d.norm() - 1.0));
      rep.max_orthogonality = std::max(rep.max_orthogonality, std::abs(m.dot(d)));
      rep.max_moment = std::max(rep.max_moment, m.cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

}  // namespace raytraj::plucker
