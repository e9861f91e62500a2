#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <random>

#include "sof/config.hpp"
#include "sof/io_camera.hpp"
#include "sof/io_maps.hpp"
#include "sof/io_mesh.hpp"
#include "sof/io_scene.hpp"
#include "test_util.hpp"

using namespace sof;

namespace {

std::string tmp_path(const std::string& name) { return testing::TempDir() + name; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void expect_throw_containing(const std::function<void()>& fn, const std::string& what) {
  try {
    fn();
    FAIL() << "expected exception containing: " << what;
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(SceneIO, RoundTrip) {
  std::mt19937 rng(61);
  const auto scene = tu::random_scene(rng, 20);
  const std::string path = tmp_path("scene_rt.ply");
  write_scene(scene, path);
  const auto loaded = parse_scene(path);
  ASSERT_EQ(loaded.gaussians.size(), scene.size());
  for (size_t i = 0; i < scene.size(); ++i) {
    const auto& a = scene[i];
    const auto& b = loaded.gaussians[i];
    // storage is float32 with logit/log transforms, so only approximate
    EXPECT_LT((a.position - b.position).norm(), 1e-5);
    EXPECT_LT((a.scale - b.scale).cwiseQuotient(a.scale).norm(), 1e-5);
    EXPECT_NEAR(a.opacity, b.opacity, 1e-6);
    EXPECT_LT((a.dc_color - b.dc_color).norm(), 1e-6);
    EXPECT_GT(std::abs(a.rotation.coeffs().dot(b.rotation.coeffs())), 1.0 - 1e-9);
  }
}

TEST(SceneIO, RotationsNormalizedOnLoad) {
  const std::string path = tmp_path("scene_rot.ply");
  GaussianPrimitive g;
  g.rotation = Quat(1, 2, 3, 4).normalized();
  write_scene({g}, path);
  const auto loaded = parse_scene(path);
  EXPECT_NEAR(loaded.gaussians[0].rotation.norm(), 1.0, 1e-12);
}

TEST(SceneIO, EmptySceneRejected) {
  const std::string path = tmp_path("scene_empty.ply");
  write_text(path,
             "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
             "property float x\nend_header\n");
  expect_throw_containing([&] { parse_scene(path); }, "no Gaussians");
}

TEST(SceneIO, BigEndianRejected) {
  const std::string path = tmp_path("scene_be.ply");
  write_text(path,
             "ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
             "property float x\nend_header\n");
  expect_throw_containing([&] { parse_scene(path); }, "big-endian");
}

TEST(SceneIO, MissingPropertyRejected) {
  const std::string path = tmp_path("scene_missing.ply");
  write_text(path,
             "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
             "property float x\nproperty float y\nproperty float z\nend_header\n"
             "\0\0\0\0\0\0\0\0\0\0\0\0");
  expect_throw_containing([&] { parse_scene(path); }, "missing required property");
}

TEST(SceneIO, TruncatedPayloadRejected) {
  const std::string path = tmp_path("scene_trunc.ply");
  GaussianPrimitive g;
  write_scene({g, g}, path);
  const std::string bytes = read_bytes(path);
  write_text(path, bytes.substr(0, bytes.size() - 10));
  expect_throw_containing([&] { parse_scene(path); }, "truncated");
}

TEST(SceneIO, MalformedHeaderRejected) {
  const std::string path = tmp_path("scene_bad.ply");
  write_text(path, "not a ply file\n");
  expect_throw_containing([&] { parse_scene(path); }, "malformed PLY header");
}

TEST(CameraIO, RoundTrip) {
  std::vector<Camera> cams = tu::orbit_cameras(3, 4.0, 1.8);
  cams[0].near = 0.5;
  cams[0].far = 50.0;
  const std::string path = tmp_path("cams.json");
  save_cameras(cams, path);
  const auto loaded = load_cameras(path);
  ASSERT_EQ(loaded.size(), cams.size());
  for (size_t i = 0; i < cams.size(); ++i) {
    EXPECT_LT((loaded[i].rotation - cams[i].rotation).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((loaded[i].translation - cams[i].translation).norm(), 1e-12);
    EXPECT_DOUBLE_EQ(loaded[i].fx, cams[i].fx);
    EXPECT_DOUBLE_EQ(loaded[i].near, cams[i].near);
    EXPECT_DOUBLE_EQ(loaded[i].far, cams[i].far);
    EXPECT_EQ(loaded[i].width, cams[i].width);
  }
}

TEST(CameraIO, MissingFieldRejected) {
  const std::string path = tmp_path("cams_missing.json");
  write_text(path, R"({"cameras": [{"width": 4, "height": 4, "fx": 1, "fy": 1,
                      "cx": 2, "cy": 2, "rotation": [1,0,0,0,1,0,0,0,1]}]})");
  expect_throw_containing([&] { load_cameras(path); }, "missing field 'translation'");
}

TEST(CameraIO, NonOrthonormalRotationRejected) {
  const std::string path = tmp_path("cams_rot.json");
  write_text(path, R"({"cameras": [{"width": 4, "height": 4, "fx": 1, "fy": 1,
                      "cx": 2, "cy": 2, "rotation": [2,0,0,0,1,0,0,0,1],
                      "translation": [0,0,0]}]})");
  expect_throw_containing([&] { load_cameras(path); }, "degenerate rotation");
}

TEST(MeshIO, ObjGoldenBytes) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0.5, 0)};
  m.triangles = {{0, 1, 2}};
  const std::string path = tmp_path("tri.obj");
  write_mesh_obj(m, path);
  EXPECT_EQ(read_bytes(path), "v 0 0 0\nv 1 0 0\nv 0 0.5 0\nf 1 2 3\n");
}

TEST(MeshIO, ObjRoundTrip) {
  Mesh m;
  m.vertices = {Vec3(0.1234567890123456, -2.5, 1e-17), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {2, 1, 0}};
  const std::string path = tmp_path("rt.obj");
  write_mesh_obj(m, path);
  const Mesh back = read_mesh_obj(path);
  ASSERT_EQ(back.vertices.size(), 3u);
  for (size_t i = 0; i < 3; ++i)
    EXPECT_EQ(back.vertices[i], m.vertices[i]);  // 17 digits reproduce doubles
  EXPECT_EQ(back.triangles, m.triangles);
}

TEST(MeshIO, ObjEmptyValid) {
  const std::string path = tmp_path("empty.obj");
  write_mesh_obj(Mesh{}, path);
  const Mesh back = read_mesh_obj(path);
  EXPECT_TRUE(back.vertices.empty());
  EXPECT_TRUE(back.triangles.empty());
}

TEST(MeshIO, PlyBitExactRoundTrip) {
  std::mt19937 rng(62);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Mesh m;
  for (int i = 0; i < 50; ++i) m.vertices.emplace_back(u(rng), u(rng), u(rng));
  for (int i = 0; i + 2 < 50; i += 3) m.triangles.push_back({i, i + 1, i + 2});
  const std::string path = tmp_path("rt.ply");
  write_mesh_ply(m, path);
  const Mesh back = read_mesh_ply(path);
  ASSERT_EQ(back.vertices.size(), m.vertices.size());
  for (size_t i = 0; i < m.vertices.size(); ++i)
    EXPECT_EQ(back.vertices[i], m.vertices[i]);
  EXPECT_EQ(back.triangles, m.triangles);

  // writing again yields byte-identical output
  const std::string path2 = tmp_path("rt2.ply");
  write_mesh_ply(back, path2);
  EXPECT_EQ(read_bytes(path), read_bytes(path2));
}

TEST(MeshIO, PlyTruncatedRejected) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const std::string path = tmp_path("trunc.ply");
  write_mesh_ply(m, path);
  const std::string bytes = read_bytes(path);
  write_text(path, bytes.substr(0, bytes.size() - 4));
  expect_throw_containing([&] { read_mesh_ply(path); }, "truncated");
}

TEST(FloatMapIO, RoundTrip) {
  FloatMap map;
  map.width = 5;
  map.height = 3;
  map.channels = 2;
  map.data.resize(30);
  for (size_t i = 0; i < map.data.size(); ++i) map.data[i] = float(i) * 0.25f - 2.0f;
  const std::string path = tmp_path("map.sofmap");
  write_float_map(map, path);
  const FloatMap back = read_float_map(path);
  EXPECT_EQ(back.width, 5);
  EXPECT_EQ(back.height, 3);
  EXPECT_EQ(back.channels, 2);
  EXPECT_EQ(back.data, map.data);
}

TEST(FloatMapIO, TruncatedRejected) {
  FloatMap map;
  map.width = map.height = 4;
  map.data.assign(16, 1.0f);
  const std::string path = tmp_path("map_trunc.sofmap");
  write_float_map(map, path);
  const std::string bytes = read_bytes(path);
  write_text(path, bytes.substr(0, bytes.size() - 3));
  expect_throw_containing([&] { read_float_map(path); }, "truncated");
}

TEST(FloatMapIO, BadHeaderRejected) {
  const std::string path = tmp_path("map_bad.sofmap");
  write_text(path, "notamap 4 4 1\n");
  expect_throw_containing([&] { read_float_map(path); }, "malformed float map header");
}

TEST(ConfigIO, RoundTrip) {
  RunConfig c;
  c.depth_mode = DepthMode::kMedian;
  c.bounding = BoundingVariant::kStretchedSigma;
  c.cutoff = SeedCutoff::kNone;
  c.strategies.early_stop = false;
  c.tile_size = 32;
  c.refine_iterations = 4;
  c.threads = 3;
  c.scene_bounded = true;
  c.weights.lambda_normal = 0.5;
  const std::string path = tmp_path("config.json");
  save_config(c, path);
  const RunConfig back = load_config(path);
  EXPECT_EQ(back.depth_mode, DepthMode::kMedian);
  EXPECT_EQ(back.bounding, BoundingVariant::kStretchedSigma);
  EXPECT_EQ(back.cutoff, SeedCutoff::kNone);
  EXPECT_FALSE(back.strategies.early_stop);
  EXPECT_TRUE(back.strategies.min_z);
  EXPECT_EQ(back.tile_size, 32);
  EXPECT_EQ(back.refine_iterations, 4);
  EXPECT_EQ(back.threads, 3);
  EXPECT_TRUE(back.scene_bounded);
  EXPECT_DOUBLE_EQ(back.weights.lambda_normal, 0.5);
}

TEST(ConfigIO, DefaultsFromEmptyObject) {
  const RunConfig c = config_from_json(nlohmann::json::object());
  EXPECT_DOUBLE_EQ(c.near, 0.2);
  EXPECT_DOUBLE_EQ(c.far, 100.0);
  EXPECT_EQ(c.depth_mode, DepthMode::kExact);
  EXPECT_EQ(c.block_size, 256);
  EXPECT_EQ(c.refine_iterations, 8);
  EXPECT_DOUBLE_EQ(c.weights.lambda_opa, 0.04);
  EXPECT_EQ(c.weights.activation_iteration, 15000);
}

TEST(ConfigIO, ValidationErrors) {
  nlohmann::json j;
  j["near"] = 2.0;
  j["far"] = 1.0;
  expect_throw_containing([&] { config_from_json(j); }, "config error");
  j = nlohmann::json::object();
  j["depth_mode"] = "average";
  expect_throw_containing([&] { config_from_json(j); }, "exact|median");
  j = nlohmann::json::object();
  j["threads"] = 0;
  expect_throw_containing([&] { config_from_json(j); }, "threads");
}

TEST(CountersCsv, Format) {
  const std::string path = tmp_path("counters.csv");
  write_counters_csv({{"pairs", 12345}, {"skipped", 0}}, path);
  EXPECT_EQ(read_bytes(path), "counter,value\npairs,12345\nskipped,0\n");
}
