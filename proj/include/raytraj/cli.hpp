#pragma once

// `raytraj` command-line driver.
//
//   parse   RealEstate10K pose file -> trajectory JSON
//   synth   trajectory spec JSON    -> trajectory JSON
//   embed   trajectory JSON         -> Plücker tensor (.npy)
//   eval    two trajectory JSONs    -> RotErr / TransErr report JSON
//   encode  Plücker tensor (.npy)   -> one feature tensor per encoder scale
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 I/O error.
// Outputs are written to a temporary sibling and renamed into place, so a
// failing command leaves no partial files behind.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "raytraj/encoder.hpp"
#include "raytraj/errors.hpp"
#include "raytraj/geometry.hpp"
#include "raytraj/json_io.hpp"
#include "raytraj/metrics.hpp"
#include "raytraj/npy.hpp"
#include "raytraj/plucker.hpp"
#include "raytraj/pose_io.hpp"
#include "raytraj/traj_synth.hpp"

namespace raytraj::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kIoError = 3 };

namespace detail {

namespace fs = std::filesystem;

inline fs::path temp_sibling(const fs::path& target) {
  return target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
}

/// Writes `bytes` next to `target` and renames it into place.
class StagedFile {
 public:
  StagedFile(fs::path target, const std::string& bytes) : target_(std::move(target)), temp_(temp_sibling(target_)) {
    std::ofstream out(temp_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + temp_.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      discard();
      throw Error(Errc::Io, "failed writing " + temp_.string());
    }
  }
  StagedFile(const StagedFile&) = delete;
  StagedFile& operator=(const StagedFile&) = delete;
  StagedFile(StagedFile&& o) noexcept : target_(std::move(o.target_)), temp_(std::move(o.temp_)), live_(o.live_) {
    o.live_ = false;
  }
  ~StagedFile() { discard(); }

  void commit() {
    std::error_code ec;
    fs::rename(temp_, target_, ec);
    if (ec) throw Error(Errc::Io, "cannot move output into " + target_.string() + ": " + ec.message());
    live_ = false;
  }

 private:
  void discard() noexcept {
    if (!live_) return;
    std::error_code ec;
    fs::remove(temp_, ec);
    live_ = false;
  }

  fs::path target_;
  fs::path temp_;
  bool live_ = true;
};

inline void write_atomically(const fs::path& target, const std::string& bytes) {
  StagedFile f(target, bytes);
  f.commit();
}

inline std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw CLI::ValidationError("--frames", "empty entry in index list");
    item = item.substr(b, e - b + 1);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.front() == '-') {
      throw CLI::ValidationError("--frames", "'" + item + "' is not a non-negative integer");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw CLI::ValidationError("--frames", "index list is empty");
  return out;
}

inline std::string shape_text(const Shape& s) { return to_string(s); }

}  // namespace detail

struct ParseArgs {
  std::string input;
  int width = 0;
  int height = 0;
  std::string frames;
  std::size_t stride = 0;
  std::size_t count = 0;
  std::size_t start = 0;
  std::string out;
};

inline int cmd_parse(const ParseArgs& a, std::ostream& out) {
  const pose_io::PoseFile pf = pose_io::parse_pose_file(pose_io::read_text_file(a.input));
  std::vector<std::size_t> indices;
  if (!a.frames.empty()) {
    indices = detail::parse_index_list(a.frames);
  } else if (a.count > 0) {
    indices = pose_io::strided_indices(a.count, a.stride == 0 ? 1 : a.stride, a.start);
  } else {
    indices.resize(pf.frames.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  }
  const Trajectory traj = pose_io::to_trajectory(pf, a.width, a.height, indices);
  detail::write_atomically(a.out, json_io::trajectory_to_json(traj).dump(2) + "\n");
  out << "frames: " << traj.size() << "\nconvention: " << to_string(traj.convention()) << "\n";
  return kOk;
}

struct SynthArgs {
  std::string spec;
  std::string out;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const synth::SynthesisPlan plan = json_io::parse_trajectory_spec(pose_io::read_text_file(a.spec));
  const Trajectory traj = synth::synthesize(plan);
  detail::write_atomically(a.out, json_io::trajectory_to_json(traj).dump(2) + "\n");

  const CameraPose& last = traj[traj.size() - 1];
  const double angle = metrics::rotation_angle_between(last.extrinsics.rotation(), Mat3::Identity());
  const Vec3 center = camera_center(last);
  out << std::setprecision(12) << "frames: " << traj.size() << "\nconvention: " << to_string(traj.convention())
      << "\nlast_frame_rotation_degrees: " << radians_to_degrees(angle) << "\nlast_frame_center: [" << center.x()
      << ", " << center.y() << ", " << center.z() << "]\n";
  return kOk;
}

struct EmbedArgs {
  std::string traj;
  std::string out;
  std::string pixel_origin = "center";
  bool verify = false;
};

inline int cmd_embed(const EmbedArgs& a, std::ostream& out) {
  const Trajectory traj = json_io::trajectory_from_json(pose_io::read_text_file(a.traj));
  const auto origin = a.pixel_origin == "corner" ? plucker::PixelOrigin::Corner : plucker::PixelOrigin::Center;
  const Tensor p = plucker::plucker_sequence(traj, origin);
  detail::write_atomically(a.out, npy::encode(p));
  out << "shape: " << detail::shape_text(p.shape()) << "\n";

  if (a.verify) {
    const Tensor back = npy::load(a.out);
    if (back.shape() != p.shape() ||
        std::memcmp(back.data().data(), p.data().data(), p.size() * sizeof(float)) != 0) {
      throw Error(Errc::Io, "re-read tensor differs from the written one");
    }
    const plucker::InvariantReport rep = plucker::check_invariants(back);
    out << std::setprecision(6) << "max_unit_error: " << rep.max_unit_error
        << "\nmax_moment_direction_dot: " << rep.max_orthogonality << "\nmax_abs_moment: " << rep.max_moment << "\n";
    if (rep.max_unit_error >= 1e-6 || rep.max_orthogonality >= 1e-6) {
      throw Error(Errc::InvalidTrajectory, "embedding violates the Plücker constraints");
    }
  }
  return kOk;
}

struct EvalArgs {
  std::string gt;
  std::string gen;
  std::string out;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Trajectory gt = json_io::trajectory_from_json(pose_io::read_text_file(a.gt));
  const Trajectory gen = json_io::trajectory_from_json(pose_io::read_text_file(a.gen));
  const metrics::AlignmentReport report = metrics::evaluate(gt, gen);
  detail::write_atomically(a.out, json_io::report_to_json(report).dump(2) + "\n");
  out << std::setprecision(12) << "rot_err: " << report.rot_err_total << "\ntrans_err: " << report.trans_err_total
      << "\nrescale_factor: " << report.rescale_factor << "\n";
  return kOk;
}

struct EncodeArgs {
  std::string plucker;
  std::uint64_t seed = 0;
  std::vector<std::size_t> channels{320, 640, 1280, 1280};
  std::size_t heads = 8;
  std::size_t mlp_ratio = 4;
  std::string out_dir;
};

inline int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  if (a.channels.size() != encoder::kScales) {
    throw CLI::ValidationError("--channels", "expected 4 comma-separated channel counts");
  }
  encoder::EncoderConfig cfg;
  std::copy(a.channels.begin(), a.channels.end(), cfg.channels.begin());
  cfg.heads = a.heads;
  cfg.mlp_ratio = a.mlp_ratio;
  cfg.seed = a.seed;
  encoder::validate(cfg);

  const Tensor input = npy::load(a.plucker);
  if (input.rank() == 4 || input.rank() == 5) {
    const std::size_t r = input.rank();
    encoder::shape_schedule(cfg, r == 5 ? input.dim(0) : 1, input.dim(r - 4), input.dim(r - 2), input.dim(r - 1));
  } else {
    throw Error(Errc::ShapeMismatch, "expected (n, 6, h, w) or (b, n, 6, h, w), got " + to_string(input.shape()));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const encoder::CameraEncoder enc(cfg);
  const encoder::MultiScaleCameraFeatures features = enc.forward(input);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(a.out_dir);
  std::vector<detail::StagedFile> staged;
  staged.reserve(encoder::kScales);
  for (std::size_t s = 0; s < encoder::kScales; ++s) {
    const auto path = std::filesystem::path(a.out_dir) / ("scale" + std::to_string(s + 1) + ".npy");
    staged.emplace_back(path, npy::encode(features.scales[s]));
  }
  for (auto& f : staged) f.commit();

  for (std::size_t s = 0; s < encoder::kScales; ++s) {
    out << "scale" << s + 1 << ": " << detail::shape_text(features.scales[s].shape()) << "\n";
  }
  out << std::setprecision(3) << "forward_seconds: " << secs << "\n";
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Camera trajectory toolkit: pose parsing, synthesis, Plücker embeddings, metrics, encoder"};
  app.require_subcommand(1);

  ParseArgs pa;
  auto* parse = app.add_subcommand("parse", "Convert a RealEstate10K pose file to trajectory JSON");
  parse->add_option("--input", pa.input, "Pose file")->required();
  parse->add_option("--width", pa.width, "Target image width in pixels")->required()->check(CLI::PositiveNumber);
  parse->add_option("--height", pa.height, "Target image height in pixels")->required()->check(CLI::PositiveNumber);
  auto* frames_opt = parse->add_option("--frames", pa.frames, "Comma-separated record indices, e.g. 0,8,16");
  parse->add_option("--count", pa.count, "Number of frames to sample with --stride")->excludes(frames_opt);
  parse->add_option("--stride", pa.stride, "Sampling stride used with --count")->excludes(frames_opt);
  parse->add_option("--start", pa.start, "First record index used with --count")->excludes(frames_opt);
  parse->add_option("--out", pa.out, "Output trajectory JSON")->required();

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a trajectory from a JSON spec");
  synth_cmd->add_option("--spec", sa.spec, "Trajectory spec JSON")->required();
  synth_cmd->add_option("--out", sa.out, "Output trajectory JSON")->required();

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Write the (n, 6, h, w) Plücker embedding of a trajectory");
  embed->add_option("--traj", ea.traj, "Trajectory JSON")->required();
  embed->add_option("--out", ea.out, "Output .npy")->required();
  embed->add_option("--pixel-origin", ea.pixel_origin, "Ray through pixel centers or corners")
      ->check(CLI::IsMember({"center", "corner"}));
  embed->add_flag("--verify", ea.verify, "Re-read the output and check the Plücker constraints");

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Score a generated trajectory against ground truth");
  eval->add_option("--gt", va.gt, "Ground-truth trajectory JSON")->required();
  eval->add_option("--gen", va.gen, "Generated trajectory JSON")->required();
  eval->add_option("--out", va.out, "Output report JSON")->required();

  EncodeArgs ca;
  auto* encode = app.add_subcommand("encode", "Run the camera encoder on a Plücker tensor");
  encode->add_option("--plucker", ca.plucker, "Input .npy of shape (n, 6, h, w) or (b, n, 6, h, w)")->required();
  encode->add_option("--seed", ca.seed, "Weight initialization seed");
  encode->add_option("--channels", ca.channels, "Channels of the four scales")->delimiter(',')->expected(4);
  encode->add_option("--heads", ca.heads, "Attention heads")->check(CLI::PositiveNumber);
  encode->add_option("--mlp-ratio", ca.mlp_ratio, "MLP hidden expansion")->check(CLI::PositiveNumber);
  encode->add_option("--out-dir", ca.out_dir, "Directory for scale1.npy .. scale4.npy")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (parse->parsed()) return cmd_parse(pa, out);
    if (synth_cmd->parsed()) return cmd_synth(sa, out);
    if (embed->parsed()) return cmd_embed(ea, out);
    if (eval->parsed()) return cmd_eval(va, out);
    if (encode->parsed()) return cmd_encode(ca, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::Io ? kIoError : kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace raytraj::cli
