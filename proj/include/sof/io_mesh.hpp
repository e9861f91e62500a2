#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sof/mesh.hpp"

namespace sof {

enum class MeshFormat { kObj, kPlyBinary };

/// OBJ with v/f records; coordinates printed with 17 significant digits so a
/// reload reproduces the doubles exactly.
inline void write_mesh_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh: " + path);
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

inline Mesh read_mesh_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh: " + path);
  Mesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "v") {
      Vec3 v;
      ls >> v.x() >> v.y() >> v.z();
      mesh.vertices.push_back(v);
    } else if (tok == "f") {
      std::array<int, 3> t;
      ls >> t[0] >> t[1] >> t[2];
      mesh.triangles.push_back({t[0] - 1, t[1] - 1, t[2] - 1});
    }
  }
  return mesh;
}

/// Binary little-endian PLY with double-precision coordinates; byte-stable
/// and exactly round-trippable.
inline void write_mesh_ply(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mesh: " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) {
    const double xyz[3] = {v.x(), v.y(), v.z()};
    out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
  }
  for (const auto& t : mesh.triangles) {
    const unsigned char n = 3;
    const std::int32_t idx[3] = {t[0], t[1], t[2]};
    out.write(reinterpret_cast<const char*>(&n), 1);
    out.write(reinterpret_cast<const char*>(idx), sizeof idx);
  }
}

inline Mesh read_mesh_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw std::runtime_error("malformed PLY header: missing magic");
  long long n_vertices = -1, n_faces = -1;
  std::string current_element;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian")
        throw std::runtime_error("unsupported PLY format: " + fmt);
    } else if (tok == "element") {
      long long count;
      ls >> current_element >> count;
      if (current_element == "vertex") n_vertices = count;
      if (current_element == "face") n_faces = count;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (n_vertices < 0 || n_faces < 0)
    throw std::runtime_error("malformed PLY header: incomplete");
  Mesh mesh;
  for (long long i = 0; i < n_vertices; ++i) {
    double xyz[3];
    in.read(reinterpret_cast<char*>(xyz), sizeof xyz);
    if (in.gcount() != sizeof xyz) throw std::runtime_error("truncated PLY payload");
    mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  for (long long i = 0; i < n_faces; ++i) {
    unsigned char n;
    std::int32_t idx[3];
    in.read(reinterpret_cast<char*>(&n), 1);
    if (in.gcount() != 1 || n != 3) throw std::runtime_error("only triangle faces supported");
    in.read(reinterpret_cast<char*>(idx), sizeof idx);
    if (in.gcount() != sizeof idx) throw std::runtime_error("truncated PLY payload");
    mesh.triangles.push_back({idx[0], idx[1], idx[2]});
  }
  return mesh;
}

inline void write_mesh(const Mesh& mesh, const std::string& path, MeshFormat format) {
  if (format == MeshFormat::kObj)
    write_mesh_obj(mesh, path);
  else
    write_mesh_ply(mesh, path);
}

}  // namespace sof
