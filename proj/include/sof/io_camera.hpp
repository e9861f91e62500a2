#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sof/camera.hpp"

namespace sof {

/// JSON schema (documented in the README): {"cameras": [{width, height, fx,
/// fy, cx, cy, rotation: 9 row-major world-to-view entries, translation: 3,
/// near?, far?}, ...]}.
inline std::vector<Camera> load_cameras(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open camera file: " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("camera schema error: ") + e.what());
  }
  if (!root.contains("cameras") || !root["cameras"].is_array())
    throw std::runtime_error("camera schema error: missing field 'cameras'");

  std::vector<Camera> out;
  for (const auto& jc : root["cameras"]) {
    for (const char* req : {"width", "height", "fx", "fy", "cx", "cy", "rotation",
                            "translation"})
      if (!jc.contains(req))
        throw std::runtime_error(std::string("camera schema error: missing field '") +
                                 req + "'");
    Camera cam;
    cam.width = jc["width"].get<int>();
    cam.height = jc["height"].get<int>();
    cam.fx = jc["fx"].get<double>();
    cam.fy = jc["fy"].get<double>();
    cam.cx = jc["cx"].get<double>();
    cam.cy = jc["cy"].get<double>();
    const auto& r = jc["rotation"];
    const auto& t = jc["translation"];
    if (!r.is_array() || r.size() != 9)
      throw std::runtime_error("camera schema error: rotation must have 9 entries");
    if (!t.is_array() || t.size() != 3)
      throw std::runtime_error("camera schema error: translation must have 3 entries");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cam.rotation(i, j) = r[i * 3 + j].get<double>();
    for (int i = 0; i < 3; ++i) cam.translation[i] = t[i].get<double>();
    if (jc.contains("near")) cam.near = jc["near"].get<double>();
    if (jc.contains("far")) cam.far = jc["far"].get<double>();
    if ((cam.rotation * cam.rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() >
        1e-6)
      throw std::runtime_error("degenerate rotation: not orthonormal");
    if (cam.width <= 0 || cam.height <= 0 || cam.fx <= 0.0 || cam.fy <= 0.0)
      throw std::runtime_error("camera schema error: non-positive intrinsics");
    out.push_back(cam);
  }
  return out;
}

inline void save_cameras(const std::vector<Camera>& cameras, const std::string& path) {
  nlohmann::json root;
  root["cameras"] = nlohmann::json::array();
  for (const auto& cam : cameras) {
    nlohmann::json jc;
    jc["width"] = cam.width;
    jc["height"] = cam.height;
    jc["fx"] = cam.fx;
    jc["fy"] = cam.fy;
    jc["cx"] = cam.cx;
    jc["cy"] = cam.cy;
    std::vector<double> r(9), t(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r[i * 3 + j] = cam.rotation(i, j);
    for (int i = 0; i < 3; ++i) t[i] = cam.translation[i];
    jc["rotation"] = r;
    jc["translation"] = t;
    jc["near"] = cam.near;
    jc["far"] = cam.far;
    root["cameras"].push_back(jc);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write camera file: " + path);
  out << root.dump(2) << "\n";
}

}  // namespace sof
