#pragma once

// Random generators and independent oracles shared by the test suites.

#include <cmath>
#include <random>
#include <vector>

#include "raytraj/geometry.hpp"

namespace raytraj::testing {

using Rng = std::mt19937_64;

inline Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

inline Vec3 random_vec(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Extrinsics random_extrinsics(Rng& rng, Convention c = Convention::WorldToCamera, double scale = 5.0) {
  return Extrinsics(random_rotation(rng), random_vec(rng, scale), c);
}

inline Intrinsics random_intrinsics(Rng& rng, int width, int height) {
  std::uniform_real_distribution<double> f(0.5, 2.0);
  std::uniform_real_distribution<double> p(0.3, 0.7);
  return {f(rng) * width, f(rng) * height, p(rng) * width, p(rng) * height};
}

inline Trajectory random_trajectory(Rng& rng, std::size_t n, Convention c = Convention::WorldToCamera,
                                    int width = 64, int height = 48) {
  std::vector<CameraPose> poses;
  for (std::size_t i = 0; i < n; ++i) poses.push_back({random_intrinsics(rng, width, height), random_extrinsics(rng, c)});
  return Trajectory(std::move(poses), width, height);
}

/// 4x4 homogeneous matrix built entry by entry from raw R and t.
inline Mat4 homogeneous_oracle(const Mat3& r, const Vec3& t) {
  Mat4 h = Mat4::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) h(i, j) = r(i, j);
    h(i, 3) = t(i);
  }
  h(3, 3) = 1.0;
  return h;
}

inline Mat4 homogeneous_oracle(const Extrinsics& e) { return homogeneous_oracle(e.rotation(), e.translation()); }

/// Rotation angle via a quaternion extracted with Shepperd's method; angle =
/// 2 atan2(|v|, |w|). Independent of the trace/arccos route.
inline double quaternion_angle(const Mat3& r) {
  const double tr = r.trace();
  double w, x, y, z;
  if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    x = (r(2, 1) - r(1, 2)) / s;
    y = (r(0, 2) - r(2, 0)) / s;
    z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    w = (r(2, 1) - r(1, 2)) / s;
    x = 0.25 * s;
    y = (r(0, 1) + r(1, 0)) / s;
    z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    w = (r(0, 2) - r(2, 0)) / s;
    x = (r(0, 1) + r(1, 0)) / s;
    y = 0.25 * s;
    z = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    w = (r(1, 0) - r(0, 1)) / s;
    x = (r(0, 2) + r(2, 0)) / s;
    y = (r(1, 2) + r(2, 1)) / s;
    z = 0.25 * s;
  }
  return 2.0 * std::atan2(std::sqrt(x * x + y * y + z * z), std::abs(w));
}

/// Sum of squared translation differences accumulated in long double.
inline long double trans_err_oracle(const Trajectory& gt, const Trajectory& gen) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const long double d = static_cast<long double>(gt[i].extrinsics.translation()(k)) -
                            static_cast<long double>(gen[i].extrinsics.translation()(k));
      total += d * d;
    }
  }
  return total;
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace raytraj::testing
