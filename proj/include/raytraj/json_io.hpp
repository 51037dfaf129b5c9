#pragma once

// JSON documents exchanged by the command-line tools:
//
//   trajectory  {"convention", "width", "height", "poses": [{"fx","fy","cx","cy","R":[9],"t":[3]}]}
//   spec        {"frames", "width", "height", "intrinsics": {...}, "motion": {...}, "motions": [...]}
//   report      {"rot_err", "trans_err", "trans_err_unsquared", "rescale_factor", "per_frame": [...]}
//
// Angles in specs are degrees; everything parsed is converted to radians.

#include <json.hpp>

#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/geometry.hpp"
#include "raytraj/metrics.hpp"
#include "raytraj/traj_synth.hpp"

namespace raytraj::json_io {

using nlohmann::json;

namespace detail {

inline const char* type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "required");
  return *it;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, std::string("expected object, got ") + type_name(j));
}

inline void reject_unknown(const json& obj, const std::string& path, std::set<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw SchemaError(path + "/" + key, "unknown key");
  }
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, std::string("expected number, got ") + type_name(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "must be finite");
  return v;
}

inline int positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, std::string("expected integer, got ") + type_name(j));
  const auto v = j.get<long long>();
  if (v < 1 || v > 1'000'000'000) throw SchemaError(path, "must be a positive integer");
  return static_cast<int>(v);
}

template <std::size_t N>
std::array<double, N> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, std::string("expected array, got ") + type_name(j));
  if (j.size() != N) throw SchemaError(path, "expected " + std::to_string(N) + " numbers, got " + std::to_string(j.size()));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], path + "/" + std::to_string(i));
  return out;
}

inline Vec3 unit_vector(const json& j, const std::string& path) {
  const auto a = number_array<3>(j, path);
  const Vec3 v(a[0], a[1], a[2]);
  if (std::abs(v.norm() - 1.0) > kUnitAxisTolerance) throw SchemaError(path, "must have unit length");
  return v;
}

inline Intrinsics intrinsics(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"fx", "fy", "cx", "cy"});
  Intrinsics k;
  k.fx = number(require(j, path, "fx"), path + "/fx");
  k.fy = number(require(j, path, "fy"), path + "/fy");
  k.cx = number(require(j, path, "cx"), path + "/cx");
  k.cy = number(require(j, path, "cy"), path + "/cy");
  if (!(k.fx > 0.0)) throw SchemaError(path + "/fx", "must be positive");
  if (!(k.fy > 0.0)) throw SchemaError(path + "/fy", "must be positive");
  return k;
}

inline synth::MotionDirective motion(const json& j, const std::string& path) {
  require_object(j, path);
  const json& kind_json = require(j, path, "kind");
  if (!kind_json.is_string()) {
    throw SchemaError(path + "/kind", std::string("expected string, got ") + type_name(kind_json));
  }
  const std::string kind = kind_json.get<std::string>();

  if (kind == "pan") {
    reject_unknown(j, path, {"kind", "direction", "interval"});
    return synth::PanMotion{unit_vector(require(j, path, "direction"), path + "/direction"),
                            number(require(j, path, "interval"), path + "/interval")};
  }
  if (kind == "zoom") {
    // translation along the optical axis; positive interval moves forward
    reject_unknown(j, path, {"kind", "interval"});
    return synth::PanMotion{Vec3::UnitZ(), number(require(j, path, "interval"), path + "/interval")};
  }
  if (kind == "rotate") {
    reject_unknown(j, path, {"kind", "axis", "degrees", "orbit_radius"});
    synth::RotateMotion m;
    m.axis = unit_vector(require(j, path, "axis"), path + "/axis");
    m.total_radians = degrees_to_radians(number(require(j, path, "degrees"), path + "/degrees"));
    if (j.contains("orbit_radius")) {
      m.orbit_radius = number(j["orbit_radius"], path + "/orbit_radius");
      if (m.orbit_radius < 0.0) throw SchemaError(path + "/orbit_radius", "must be >= 0");
    }
    return m;
  }
  if (kind == "principal_shift") {
    reject_unknown(j, path, {"kind", "shift"});
    const auto s = number_array<2>(require(j, path, "shift"), path + "/shift");
    return synth::PrincipalShiftMotion{s[0], s[1]};
  }
  if (kind == "focal_zoom") {
    reject_unknown(j, path, {"kind", "scale"});
    const double s = number(require(j, path, "scale"), path + "/scale");
    if (!(s > 0.0)) throw SchemaError(path + "/scale", "must be positive");
    return synth::FocalZoomMotion{s};
  }
  throw SchemaError(path + "/kind", "unknown motion kind '" + kind +
                                        "' (expected pan, zoom, rotate, principal_shift or focal_zoom)");
}

inline json finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, std::string("non-finite ") + what);
  return v;
}

}  // namespace detail

/// Validates a trajectory spec document and converts it to a synthesis plan.
inline synth::SynthesisPlan parse_trajectory_spec(const json& doc) {
  detail::require_object(doc, "");
  detail::reject_unknown(doc, "", {"frames", "width", "height", "intrinsics", "motion", "motions"});

  synth::SynthesisPlan plan;
  plan.frames = detail::positive_int(detail::require(doc, "", "frames"), "/frames");
  plan.width = detail::positive_int(detail::require(doc, "", "width"), "/width");
  plan.height = detail::positive_int(detail::require(doc, "", "height"), "/height");
  plan.intrinsics = detail::intrinsics(detail::require(doc, "", "intrinsics"), "/intrinsics");

  if (doc.contains("motion")) plan.motions.push_back(detail::motion(doc["motion"], "/motion"));
  if (doc.contains("motions")) {
    const json& list = doc["motions"];
    if (!list.is_array()) {
      throw SchemaError("/motions", std::string("expected array, got ") + detail::type_name(list));
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      plan.motions.push_back(detail::motion(list[i], "/motions/" + std::to_string(i)));
    }
  }
  if (plan.motions.empty()) throw SchemaError("/motion", "required");

  for (const auto& m : plan.motions) {
    if (const auto* rot = std::get_if<synth::RotateMotion>(&m); rot && plan.frames < 2 && rot->total_radians != 0.0) {
      throw SchemaError("/frames", "a nonzero rotation needs at least two frames");
    }
  }
  return plan;
}

inline synth::SynthesisPlan parse_trajectory_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_trajectory_spec(doc);
}

inline synth::SynthesisPlan parse_trajectory_spec(const std::string& text) {
  return parse_trajectory_spec(std::string_view(text));
}
inline synth::SynthesisPlan parse_trajectory_spec(const char* text) {
  return parse_trajectory_spec(std::string_view(text));
}

inline json trajectory_to_json(const Trajectory& traj) {
  json poses = json::array();
  for (const auto& p : traj.poses()) {
    const Mat3& r = p.extrinsics.rotation();
    const Vec3& t = p.extrinsics.translation();
    json rot = json::array();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rot.push_back(r(i, j));
    poses.push_back({{"fx", p.intrinsics.fx},
                     {"fy", p.intrinsics.fy},
                     {"cx", p.intrinsics.cx},
                     {"cy", p.intrinsics.cy},
                     {"R", std::move(rot)},
                     {"t", json::array({t.x(), t.y(), t.z()})}});
  }
  return {{"convention", to_string(traj.convention())},
          {"width", traj.width()},
          {"height", traj.height()},
          {"poses", std::move(poses)}};
}

inline Trajectory trajectory_from_json(const json& doc) {
  detail::require_object(doc, "");
  detail::reject_unknown(doc, "", {"convention", "width", "height", "poses"});

  const json& conv = detail::require(doc, "", "convention");
  Convention convention;
  if (conv == "world_to_camera") {
    convention = Convention::WorldToCamera;
  } else if (conv == "camera_to_world") {
    convention = Convention::CameraToWorld;
  } else {
    throw SchemaError("/convention", "expected \"world_to_camera\" or \"camera_to_world\"");
  }
  const int width = detail::positive_int(detail::require(doc, "", "width"), "/width");
  const int height = detail::positive_int(detail::require(doc, "", "height"), "/height");

  const json& list = detail::require(doc, "", "poses");
  if (!list.is_array()) throw SchemaError("/poses", std::string("expected array, got ") + detail::type_name(list));
  if (list.empty()) throw SchemaError("/poses", "at least one pose is required");

  std::vector<CameraPose> poses;
  poses.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "/poses/" + std::to_string(i);
    const json& p = list[i];
    detail::require_object(p, path);
    detail::reject_unknown(p, path, {"fx", "fy", "cx", "cy", "R", "t"});
    Intrinsics k;
    k.fx = detail::number(detail::require(p, path, "fx"), path + "/fx");
    k.fy = detail::number(detail::require(p, path, "fy"), path + "/fy");
    k.cx = detail::number(detail::require(p, path, "cx"), path + "/cx");
    k.cy = detail::number(detail::require(p, path, "cy"), path + "/cy");
    if (!(k.fx > 0.0 && k.fy > 0.0)) throw SchemaError(path, "focal lengths must be positive");
    const auto r = detail::number_array<9>(detail::require(p, path, "R"), path + "/R");
    const auto t = detail::number_array<3>(detail::require(p, path, "t"), path + "/t");
    Mat3 rot;
    rot << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    if (!is_rotation(rot)) throw SchemaError(path + "/R", "not a proper rotation matrix");
    poses.push_back({k, Extrinsics(rot, Vec3(t[0], t[1], t[2]), convention)});
  }
  return Trajectory(std::move(poses), width, height);
}

inline Trajectory trajectory_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  return trajectory_from_json(doc);
}

inline Trajectory trajectory_from_json(const std::string& text) { return trajectory_from_json(std::string_view(text)); }
inline Trajectory trajectory_from_json(const char* text) { return trajectory_from_json(std::string_view(text)); }

inline json report_to_json(const metrics::AlignmentReport& r) {
  json frames = json::array();
  for (std::size_t i = 0; i < r.frames_compared; ++i) {
    frames.push_back({{"frame", i},
                      {"rot_err", detail::finite_or_throw(r.per_frame_rot[i], "rotation error")},
                      {"trans_err", detail::finite_or_throw(r.per_frame_trans[i], "translation error")},
                      {"trans_err_unsquared", r.per_frame_trans_unsquared[i]}});
  }
  return {{"rot_err", r.rot_err_total},
          {"trans_err", r.trans_err_total},
          {"trans_err_unsquared", r.trans_err_unsquared},
          {"rescale_factor", r.rescale_factor},
          {"frames_compared", r.frames_compared},
          {"per_frame", std::move(frames)}};
}

}  // namespace raytraj::json_io
