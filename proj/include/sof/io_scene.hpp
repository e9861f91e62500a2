#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sof/gaussian.hpp"

namespace sof {

struct SceneFile {
  std::vector<GaussianPrimitive> gaussians;
  std::string source_path;
};

namespace detail {

inline int ply_type_size(const std::string& type) {
  static const std::unordered_map<std::string, int> sizes = {
      {"char", 1},  {"int8", 1},   {"uchar", 1},  {"uint8", 1},
      {"short", 2}, {"int16", 2},  {"ushort", 2}, {"uint16", 2},
      {"int", 4},   {"int32", 4},  {"uint", 4},   {"uint32", 4},
      {"float", 4}, {"float32", 4}, {"double", 8}, {"float64", 8}};
  const auto it = sizes.find(type);
  return it == sizes.end() ? -1 : it->second;
}

inline double read_ply_scalar(const char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  throw std::runtime_error("unsupported property type: " + type);
}

}  // namespace detail

/// Reads a splatting point cloud: binary little-endian PLY with per-vertex
/// x,y,z, scale_0..2 (log), rot_0..3 (wxyz, unnormalized), opacity (logit),
/// f_dc_0..2. Unknown properties are skipped by name. Activations are applied
/// on load: exp, normalize, sigmoid, and 0.5 + C0 * dc for the color.
inline SceneFile parse_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);

  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw std::runtime_error("malformed PLY header: missing magic");

  struct Property {
    std::string type, name;
  };
  std::vector<Property> props;
  long long count = -1;
  bool in_vertex_element = false, saw_format = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_big_endian")
        throw std::runtime_error("big-endian PLY is not supported");
      if (fmt != "binary_little_endian")
        throw std::runtime_error("malformed PLY header: format must be binary_little_endian");
      saw_format = true;
    } else if (tok == "element") {
      std::string name;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element && count <= 0)
        throw std::runtime_error("scene contains no Gaussians");
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      Property p;
      ls >> p.type;
      if (p.type == "list")
        throw std::runtime_error("unsupported property type: list");
      ls >> p.name;
      if (detail::ply_type_size(p.type) < 0)
        throw std::runtime_error("unsupported property type: " + p.type);
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    } else if (!tok.empty()) {
      throw std::runtime_error("malformed PLY header: unexpected token " + tok);
    }
  }
  if (!saw_format || count < 0 || in.eof())
    throw std::runtime_error("malformed PLY header: incomplete");

  static const char* kRequired[] = {"x",       "y",       "z",      "scale_0", "scale_1",
                                    "scale_2", "rot_0",   "rot_1",  "rot_2",   "rot_3",
                                    "opacity", "f_dc_0",  "f_dc_1", "f_dc_2"};
  std::unordered_map<std::string, std::pair<int, std::string>> offsets;  // name -> (byte offset, type)
  int stride = 0;
  for (const auto& p : props) {
    offsets[p.name] = {stride, p.type};
    stride += detail::ply_type_size(p.type);
  }
  for (const char* name : kRequired)
    if (!offsets.count(name))
      throw std::runtime_error(std::string("missing required property: ") + name);

  std::vector<char> record(stride);
  auto field = [&](const char* name) {
    const auto& [off, type] = offsets.at(name);
    return detail::read_ply_scalar(record.data() + off, type);
  };

  SceneFile scene;
  scene.source_path = path;
  constexpr double kShC0 = 0.28209479177387814;
  for (long long i = 0; i < count; ++i) {
    in.read(record.data(), stride);
    if (in.gcount() != stride) throw std::runtime_error("truncated PLY payload");
    GaussianPrimitive g;
    g.position = Vec3(field("x"), field("y"), field("z"));
    g.scale = Vec3(std::exp(field("scale_0")), std::exp(field("scale_1")),
                   std::exp(field("scale_2")));
    Quat q(field("rot_0"), field("rot_1"), field("rot_2"), field("rot_3"));
    if (q.norm() < 1e-12) throw std::runtime_error("degenerate rotation quaternion");
    g.rotation = q.normalized();
    g.opacity = 1.0 / (1.0 + std::exp(-field("opacity")));
    g.dc_color = Vec3(0.5 + kShC0 * field("f_dc_0"), 0.5 + kShC0 * field("f_dc_1"),
                      0.5 + kShC0 * field("f_dc_2"));
    if (!g.position.allFinite() || !g.scale.allFinite() || !std::isfinite(g.opacity) ||
        !g.dc_color.allFinite())
      throw std::runtime_error("non-finite value after activation");
    scene.gaussians.push_back(g);
  }
  return scene;
}

/// Writes the inverse activations, producing a file parse_scene accepts.
/// Values are stored as float32, the splatting convention.
inline void write_scene(const std::vector<GaussianPrimitive>& gaussians,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << gaussians.size() << "\n";
  for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                           "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                           "rot_3"})
    out << "property float " << name << "\n";
  out << "end_header\n";
  constexpr double kShC0 = 0.28209479177387814;
  auto put = [&](double v) {
    const float f = float(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  };
  for (const auto& g : gaussians) {
    put(g.position.x());
    put(g.position.y());
    put(g.position.z());
    for (int k = 0; k < 3; ++k) put((g.dc_color[k] - 0.5) / kShC0);
    const double o = std::clamp(g.opacity, 1e-12, 1.0 - 1e-12);
    put(std::log(o / (1.0 - o)));
    for (int k = 0; k < 3; ++k) put(std::log(std::max(g.scale[k], kMinScale)));
    put(g.rotation.w());
    put(g.rotation.x());
    put(g.rotation.y());
    put(g.rotation.z());
  }
}

}  // namespace sof
