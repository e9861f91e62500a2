#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "sof/bench.hpp"
#include "sof/config.hpp"
#include "sof/io_camera.hpp"
#include "sof/io_maps.hpp"
#include "sof/io_mesh.hpp"
#include "sof/io_scene.hpp"
#include "test_util.hpp"

using namespace sof;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SOF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_capture(const std::string& args) {
  const std::string out_path = testing::TempDir() + "cli_stdout.txt";
  const std::string cmd =
      std::string(SOF_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  [[maybe_unused]] const int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Fixture {
  std::string scene_path, camera_path, out_dir;

  Fixture() {
    const std::string dir = testing::TempDir();
    scene_path = dir + "cli_scene.ply";
    camera_path = dir + "cli_cams.json";
    out_dir = dir + "cli_out";
    std::mt19937 rng(81);
    write_scene(tu::random_scene(rng, 8), scene_path);
    save_cameras(tu::orbit_cameras(2, 4.0, 1.8, 48), camera_path);
  }

  std::string io() const {
    return "--scene " + scene_path + " --cameras " + camera_path;
  }
};

}  // namespace

TEST(Cli, ExtractWritesMeshCountersConfig) {
  Fixture f;
  ASSERT_EQ(run("extract " + f.io() + " --out " + f.out_dir + " --iterations 2"), 0);
  const Mesh mesh = read_mesh_obj(f.out_dir + "/mesh.obj");
  EXPECT_GT(mesh.vertices.size(), 0u);
  EXPECT_GT(mesh.triangles.size(), 0u);

  std::ifstream counters(f.out_dir + "/counters.csv");
  std::string header;
  std::getline(counters, header);
  EXPECT_EQ(header, "counter,value");

  const RunConfig echoed = load_config(f.out_dir + "/config.json");
  EXPECT_EQ(echoed.refine_iterations, 2);  // flag override round-trips
}

TEST(Cli, ExtractPlyFormat) {
  Fixture f;
  const std::string out = f.out_dir + "_ply";
  ASSERT_EQ(run("extract " + f.io() + " --out " + out + " --format ply --iterations 1"), 0);
  EXPECT_GT(read_mesh_ply(out + "/mesh.ply").vertices.size(), 0u);
}

TEST(Cli, NaiveFlagMatchesDefault) {
  Fixture f;
  const std::string fast_dir = f.out_dir + "_fast";
  const std::string naive_dir = f.out_dir + "_naive";
  ASSERT_EQ(run("extract " + f.io() + " --out " + fast_dir + " --format ply"), 0);
  ASSERT_EQ(run("extract " + f.io() + " --out " + naive_dir + " --format ply --naive"), 0);
  const Mesh fast = read_mesh_ply(fast_dir + "/mesh.ply");
  const Mesh naive = read_mesh_ply(naive_dir + "/mesh.ply");
  ASSERT_EQ(fast.vertices.size(), naive.vertices.size());
  for (size_t i = 0; i < fast.vertices.size(); ++i)
    EXPECT_LT((fast.vertices[i] - naive.vertices[i]).cwiseAbs().maxCoeff(), 1e-9);
  const RunConfig echoed = load_config(naive_dir + "/config.json");
  EXPECT_FALSE(echoed.strategies.tile_scheduling);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  Fixture f;
  RunConfig c;
  c.refine_iterations = 3;
  c.tile_size = 32;
  const std::string cfg = testing::TempDir() + "cli_config.json";
  save_config(c, cfg);
  const std::string out = f.out_dir + "_cfg";
  ASSERT_EQ(run("extract " + f.io() + " --out " + out + " --config " + cfg +
                " --iterations 1"),
            0);
  const RunConfig echoed = load_config(out + "/config.json");
  EXPECT_EQ(echoed.tile_size, 32);       // from the file
  EXPECT_EQ(echoed.refine_iterations, 1);  // flag wins
}

TEST(Cli, RenderWritesMaps) {
  Fixture f;
  const std::string out = f.out_dir + "_render";
  ASSERT_EQ(run("render " + f.io() + " --out " + out + " --depth median"), 0);
  for (int v = 0; v < 2; ++v) {
    const FloatMap depth =
        read_float_map(out + "/view_" + std::to_string(v) + "_depth.sofmap");
    EXPECT_EQ(depth.channels, 2);
    EXPECT_EQ(depth.width, 48);
    const FloatMap normal =
        read_float_map(out + "/view_" + std::to_string(v) + "_normal.sofmap");
    EXPECT_EQ(normal.channels, 3);
  }
  EXPECT_EQ(load_config(out + "/config.json").depth_mode, DepthMode::kMedian);
}

TEST(Cli, GradcheckPasses) {
  EXPECT_EQ(run("gradcheck"), 0);
  const std::string out = run_capture("gradcheck");
  EXPECT_NE(out.find("max_rel_err"), std::string::npos);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST(Cli, BenchWritesCsv) {
  Fixture f;
  const std::string csv = testing::TempDir() + "cli_ablation.csv";
  ASSERT_EQ(run("bench " + f.io() + " --iterations 1 --csv " + csv), 0);
  std::ifstream in(csv);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, kBenchCaveat);
}

TEST(Cli, EvalPoint) {
  Fixture f;
  const std::string out = run_capture("eval-point " + f.io() + " -x 0 -y 0 -z 0");
  EXPECT_NE(out.find("O(x) ="), std::string::npos);
  EXPECT_TRUE(out.find("interior") != std::string::npos ||
              out.find("exterior") != std::string::npos);
}

TEST(Cli, ErrorsExitNonzero) {
  Fixture f;
  EXPECT_NE(run("extract --scene /nonexistent.ply --cameras " + f.camera_path), 0);
  EXPECT_NE(run("extract " + f.io() + " --depth bogus"), 0);
  EXPECT_NE(run("--definitely-not-a-flag"), 0);
  EXPECT_NE(run(""), 0);  // a subcommand is required
}
