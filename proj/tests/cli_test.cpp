#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "raytraj/cli.hpp"
#include "raytraj/npy.hpp"

namespace raytraj {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "raytraj");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("raytraj_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::string pose_file(std::size_t records) const {
    std::string text = "https://www.youtube.com/watch?v=example\n";
    for (std::size_t i = 0; i < records; ++i) {
      text += std::to_string(1000 + i * 33367) + " 0.5 0.889 0.5 0.5 0 0 1 0 0 " + std::to_string(0.01 * i) +
              " 0 1 0 0 0 0 1 0\n";
    }
    return text;
  }

  std::string synth_spec(const std::string& motion) const {
    return R"({"frames":16,"width":64,"height":64,"intrinsics":{"fx":32,"fy":32,"cx":32,"cy":32},"motion":)" +
           motion + "}";
  }

  fs::path dir_;
};

TEST_F(CliTest, ParseStridedSample) {
  write(path("poses.txt"), pose_file(128));
  const Result r = run({"parse", "--input", path("poses.txt").string(), "--width", "384", "--height", "256",
                        "--count", "16", "--stride", "8", "--out", path("traj.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("frames: 16"), std::string::npos);
  const Trajectory t = json_io::trajectory_from_json(slurp(path("traj.json")));
  ASSERT_EQ(t.size(), 16u);
  EXPECT_DOUBLE_EQ(t[0].intrinsics.fx, 192.0);
  EXPECT_NEAR(t[1].extrinsics.translation().x(), 0.08, 1e-12);
}

TEST_F(CliTest, ParseExplicitFrames) {
  write(path("poses.txt"), pose_file(4));
  const Result r = run({"parse", "--input", path("poses.txt").string(), "--width", "10", "--height", "10",
                        "--frames", "3,1", "--out", path("traj.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json_io::trajectory_from_json(slurp(path("traj.json"))).size(), 2u);
  EXPECT_EQ(run({"parse", "--input", path("poses.txt").string(), "--width", "10", "--height", "10", "--frames",
                 "0,x", "--out", path("t2.json").string()})
                .code,
            1);
}

TEST_F(CliTest, ParseMalformedLineIsDataError) {
  std::string text = pose_file(3);
  text += "5000000 0.5 0.5\n";
  write(path("bad.txt"), text);
  const Result r = run({"parse", "--input", path("bad.txt").string(), "--width", "384", "--height", "256", "--out",
                        path("traj.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("traj.json")));
}

TEST_F(CliTest, MissingInputIsIoError) {
  const Result r = run({"parse", "--input", path("nope.txt").string(), "--width", "384", "--height", "256", "--out",
                        path("traj.json").string()});
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"parse", "--input", "x"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, SynthPanAndRotation) {
  write(path("pan.json"), synth_spec(R"({"kind":"pan","direction":[-1,0,0],"interval":0.1})"));
  Result r = run({"synth", "--spec", path("pan.json").string(), "--out", path("pan_traj.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("last_frame_center: [-1.5, 0, 0]"), std::string::npos) << r.out;

  write(path("rot.json"), synth_spec(R"({"kind":"rotate","axis":[1,0,0],"degrees":100})"));
  r = run({"synth", "--spec", path("rot.json").string(), "--out", path("rot_traj.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("last_frame_rotation_degrees: 100\n"), std::string::npos) << r.out;
  EXPECT_EQ(json_io::trajectory_from_json(slurp(path("rot_traj.json"))).size(), 16u);
}

TEST_F(CliTest, SynthInvalidSpecReportsPath) {
  write(path("bad.json"), synth_spec(R"({"kind":"pan","direction":[-1,0,0],"interval":"fast"})"));
  const Result r = run({"synth", "--spec", path("bad.json").string(), "--out", path("o.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/motion/interval"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmbedWritesTensorAndVerifies) {
  write(path("zoom.json"), synth_spec(R"({"kind":"focal_zoom","scale":1.05})"));
  ASSERT_EQ(run({"synth", "--spec", path("zoom.json").string(), "--out", path("traj.json").string()}).code, 0);
  const Result r =
      run({"embed", "--traj", path("traj.json").string(), "--out", path("p.npy").string(), "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("shape: (16, 6, 64, 64)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("max_abs_moment: 0\n"), std::string::npos) << r.out;
  EXPECT_EQ(npy::load(path("p.npy")).shape(), (Shape{16, 6, 64, 64}));
}

TEST_F(CliTest, EmbedAllowsAnyImageSize) {
  write(path("s.json"),
        R"({"frames":2,"width":37,"height":23,"intrinsics":{"fx":30,"fy":30,"cx":18,"cy":11},)"
        R"("motion":{"kind":"pan","direction":[0,0,1],"interval":0.5}})");
  ASSERT_EQ(run({"synth", "--spec", path("s.json").string(), "--out", path("t.json").string()}).code, 0);
  const Result r = run({"embed", "--traj", path("t.json").string(), "--out", path("p.npy").string(),
                        "--pixel-origin", "corner"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(npy::load(path("p.npy")).shape(), (Shape{2, 6, 23, 37}));
  EXPECT_EQ(run({"embed", "--traj", path("t.json").string(), "--out", path("q.npy").string(), "--pixel-origin",
                 "middle"})
                .code,
            1);
}

TEST_F(CliTest, EvalIdenticalAndScaled) {
  write(path("a.json"),
        synth_spec(R"({"kind":"pan","direction":[0.6,0,0.8],"interval":0.1})"));
  write(path("b.json"),
        synth_spec(R"({"kind":"pan","direction":[0.6,0,0.8],"interval":0.4})"));
  ASSERT_EQ(run({"synth", "--spec", path("a.json").string(), "--out", path("ta.json").string()}).code, 0);
  ASSERT_EQ(run({"synth", "--spec", path("b.json").string(), "--out", path("tb.json").string()}).code, 0);

  Result r = run({"eval", "--gt", path("ta.json").string(), "--gen", path("ta.json").string(), "--out",
                  path("r1.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = nlohmann::json::parse(slurp(path("r1.json")));
  EXPECT_NEAR(report["rot_err"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(report["trans_err"].get<double>(), 0.0, 1e-12);

  r = run({"eval", "--gt", path("ta.json").string(), "--gen", path("tb.json").string(), "--out",
           path("r2.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  report = nlohmann::json::parse(slurp(path("r2.json")));
  EXPECT_NEAR(report["trans_err"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(report["rescale_factor"].get<double>(), 0.25, 1e-12);
}

TEST_F(CliTest, EvalLengthMismatch) {
  write(path("a.json"), synth_spec(R"({"kind":"pan","direction":[1,0,0],"interval":0.1})"));
  std::string spec = slurp(path("a.json"));
  spec.replace(spec.find("16"), 2, "12");
  write(path("b.json"), spec);
  ASSERT_EQ(run({"synth", "--spec", path("a.json").string(), "--out", path("ta.json").string()}).code, 0);
  ASSERT_EQ(run({"synth", "--spec", path("b.json").string(), "--out", path("tb.json").string()}).code, 0);
  const Result r = run({"eval", "--gt", path("ta.json").string(), "--gen", path("tb.json").string(), "--out",
                        path("r.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("LengthMismatch"), std::string::npos) << r.err;
}

TEST_F(CliTest, EncodeIsDeterministic) {
  Tensor p({2, 6, 64, 64});
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<float>(std::sin(0.01 * static_cast<double>(i)));
  npy::save(p, path("p.npy"));
  const std::vector<std::string> common{"encode", "--plucker", path("p.npy").string(), "--seed", "7",
                                        "--channels", "8,16,16,32", "--heads", "4", "--mlp-ratio", "2"};
  auto with_out = [&](const std::string& d) {
    auto args = common;
    args.insert(args.end(), {"--out-dir", path(d).string()});
    return args;
  };
  const Result a = run(with_out("a"));
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("scale4: (1, 2, 32, 1, 1)"), std::string::npos) << a.out;
  ASSERT_EQ(run(with_out("b")).code, 0);
  for (int s = 1; s <= 4; ++s) {
    const std::string name = "scale" + std::to_string(s) + ".npy";
    ASSERT_TRUE(fs::exists(path("a") / name));
    EXPECT_EQ(slurp(path("a") / name), slurp(path("b") / name)) << name;
  }
}

TEST_F(CliTest, EncodeRejectsIndivisibleInput) {
  npy::save(Tensor({2, 6, 48, 64}), path("p.npy"));
  const Result r = run({"encode", "--plucker", path("p.npy").string(), "--out-dir", path("o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("IndivisibleDims"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("o") / "scale1.npy"));
  EXPECT_EQ(run({"encode", "--plucker", path("p.npy").string(), "--channels", "8,16", "--out-dir",
                 path("o").string()})
                .code,
            1);
}

TEST_F(CliTest, BinaryExitCodes) {
  write(path("pan.json"), synth_spec(R"({"kind":"pan","direction":[-1,0,0],"interval":0.1})"));
  const std::string exe = RAYTRAJ_CLI_PATH;
  auto sh = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(sh(exe + " synth --spec " + path("pan.json").string() + " --out " + path("t.json").string()), 0);
  EXPECT_EQ(sh(exe + " synth --spec " + path("missing.json").string() + " --out " + path("u.json").string()), 3);
  EXPECT_EQ(sh(exe + " frobnicate"), 1);
}

}  // namespace
}  // namespace raytraj
