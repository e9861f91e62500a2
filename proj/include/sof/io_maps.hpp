#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sof/render.hpp"

namespace sof {

/// Float map container: `channels` interleaved float32 values per pixel,
/// row-major. On disk: one ASCII header line "sofmap W H C" followed by the
/// raw little-endian payload.
struct FloatMap {
  int width = 0, height = 0, channels = 1;
  std::vector<float> data;

  float& at(int x, int y, int c = 0) {
    return data[(size_t(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(size_t(y) * width + x) * channels + c];
  }
};

inline void write_float_map(const FloatMap& map, const std::string& path) {
  if (map.data.size() != size_t(map.width) * map.height * map.channels)
    throw std::runtime_error("float map size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write float map: " + path);
  out << "sofmap " << map.width << " " << map.height << " " << map.channels << "\n";
  out.write(reinterpret_cast<const char*>(map.data.data()),
            std::streamsize(map.data.size() * sizeof(float)));
}

inline FloatMap read_float_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open float map: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("malformed float map header");
  std::istringstream ls(line);
  std::string magic;
  FloatMap map;
  ls >> magic >> map.width >> map.height >> map.channels;
  if (magic != "sofmap" || map.width <= 0 || map.height <= 0 || map.channels <= 0)
    throw std::runtime_error("malformed float map header");
  map.data.resize(size_t(map.width) * map.height * map.channels);
  in.read(reinterpret_cast<char*>(map.data.data()),
          std::streamsize(map.data.size() * sizeof(float)));
  if (size_t(in.gcount()) != map.data.size() * sizeof(float))
    throw std::runtime_error("truncated float map payload");
  return map;
}

inline FloatMap depth_to_map(const DepthMap& dm) {
  FloatMap out;
  out.width = dm.depth.width;
  out.height = dm.depth.height;
  out.channels = 2;  // depth, opacity at depth
  out.data.resize(size_t(out.width) * out.height * 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y, 0) = float(dm.depth.at(x, y));
      out.at(x, y, 1) = float(dm.opacity.at(x, y));
    }
  return out;
}

inline FloatMap normals_to_map(const NormalMap& nm) {
  FloatMap out;
  out.width = nm.normal.width;
  out.height = nm.normal.height;
  out.channels = 3;
  out.data.resize(size_t(out.width) * out.height * 3);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = float(nm.normal.at(x, y)[c]);
  return out;
}

/// Diagnostic counters as two-column CSV.
inline void write_counters_csv(
    const std::vector<std::pair<std::string, std::uint64_t>>& counters,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write counters: " + path);
  out << "counter,value\n";
  for (const auto& [name, value] : counters) out << name << "," << value << "\n";
}

}  // namespace sof
