#pragma once

// RealEstate10K camera pose files.
//
//   line 1       source URL (opaque)
//   line 2..     timestamp fx fy cx cy k1 k2 r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3
//
// Intrinsics are normalized by the image size, the 3x4 matrix is world-to-camera
// in row-major order, and the distortion slots must be zero.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/geometry.hpp"

namespace raytraj::pose_io {

inline constexpr std::size_t kFieldsPerRecord = 19;

struct PoseRecord {
  std::int64_t timestamp = 0;  // microseconds
  double fx = 0.0;             // normalized by width
  double fy = 0.0;             // normalized by height
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  std::array<double, 12> w2c{};  // row-major 3x4

  [[nodiscard]] Mat3 rotation() const {
    Mat3 r;
    r << w2c[0], w2c[1], w2c[2], w2c[4], w2c[5], w2c[6], w2c[8], w2c[9], w2c[10];
    return r;
  }
  [[nodiscard]] Vec3 translation() const { return {w2c[3], w2c[7], w2c[11]}; }
};

struct PoseFile {
  std::string source_url;
  std::vector<PoseRecord> frames;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::size_t column) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  bool ok = ec == std::errc{} && ptr == field.data() + field.size();
  if constexpr (std::is_floating_point_v<T>) ok = ok && std::isfinite(value);
  if (!ok) {
    throw ParseError(Errc::Numeric, line, "field " + std::to_string(column) + " is not a valid number: '" +
                                              std::string(field) + "'",
                     column);
  }
  return value;
}

inline void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// Parses a pose file. Every error carries the 1-based line number.
inline PoseFile parse_pose_file(std::string_view text) {
  PoseFile pf;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!have_header) {
      pf.source_url = std::string(line);
      have_header = true;
      continue;
    }

    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != kFieldsPerRecord) {
      throw ParseError(Errc::FieldCount, line_no,
                       "expected " + std::to_string(kFieldsPerRecord) + " fields, found " +
                           std::to_string(fields.size()),
                       0, fields.size());
    }

    PoseRecord rec;
    rec.timestamp = detail::parse_number<std::int64_t>(fields[0], line_no, 1);
    std::array<double, 18> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = detail::parse_number<double>(fields[i + 1], line_no, i + 2);
    rec.fx = v[0];
    rec.fy = v[1];
    rec.cx = v[2];
    rec.cy = v[3];
    rec.k1 = v[4];
    rec.k2 = v[5];
    std::copy(v.begin() + 6, v.end(), rec.w2c.begin());

    if (rec.k1 != 0.0 || rec.k2 != 0.0) {
      throw ParseError(Errc::NonZeroDistortion, line_no, "distortion coefficients must be zero");
    }
    if (!(rec.fx > 0.0 && rec.fy > 0.0 && rec.cx >= 0.0 && rec.cx <= 1.0 && rec.cy >= 0.0 && rec.cy <= 1.0)) {
      throw ParseError(Errc::IntrinsicsOutOfRange, line_no,
                       "normalized intrinsics need fx, fy > 0 and cx, cy in [0, 1]");
    }
    if (!is_rotation(rec.rotation())) {
      throw ParseError(Errc::RotationInvalid, line_no,
                       "rotation is not orthonormal (max |R^T R - I| = " +
                           std::to_string(orthonormality_error(rec.rotation())) + ")");
    }
    if (!pf.frames.empty() && rec.timestamp <= pf.frames.back().timestamp) {
      throw ParseError(Errc::NonMonotonicTimestamp, line_no,
                       "timestamp " + std::to_string(rec.timestamp) + " does not increase");
    }
    pf.frames.push_back(rec);
  }

  if (!have_header) throw ParseError(Errc::MissingHeader, 1, "empty pose file (missing URL line)");
  return pf;
}

/// URL line, then one line of 19 single-space separated fields per record.
/// Floats use 17 significant digits.
inline std::string serialize_pose_file(const PoseFile& pf) {
  std::string out = pf.source_url;
  out.push_back('\n');
  for (const auto& r : pf.frames) {
    out += std::to_string(r.timestamp);
    for (double v : {r.fx, r.fy, r.cx, r.cy, r.k1, r.k2}) {
      out.push_back(' ');
      detail::append_double(out, v);
    }
    for (double v : r.w2c) {
      out.push_back(' ');
      detail::append_double(out, v);
    }
    out.push_back('\n');
  }
  return out;
}

/// Selects `frame_indices` (in order) and denormalizes intrinsics to the given
/// pixel dimensions. Extrinsics are tagged world-to-camera.
inline Trajectory to_trajectory(const PoseFile& pf, int width, int height,
                                const std::vector<std::size_t>& frame_indices) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "image dimensions must be >= 1");
  if (frame_indices.empty()) throw Error(Errc::IndexOutOfRange, "no frame indices given");
  std::vector<CameraPose> poses;
  poses.reserve(frame_indices.size());
  for (std::size_t idx : frame_indices) {
    if (idx >= pf.frames.size()) {
      throw Error(Errc::IndexOutOfRange, "frame index " + std::to_string(idx) + " out of range (" +
                                             std::to_string(pf.frames.size()) + " records)");
    }
    const PoseRecord& r = pf.frames[idx];
    Intrinsics k{r.fx * width, r.fy * height, r.cx * width, r.cy * height};
    poses.push_back({k, Extrinsics(r.rotation(), r.translation(), Convention::WorldToCamera)});
  }
  return Trajectory(std::move(poses), width, height);
}

/// Indices start, start+stride, ... (count of them).
inline std::vector<std::size_t> strided_indices(std::size_t count, std::size_t stride, std::size_t start = 0) {
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + i * stride;
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "failed reading " + path.string());
  return std::move(ss).str();
}

}  // namespace raytraj::pose_io
