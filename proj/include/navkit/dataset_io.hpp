#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "navkit/camera_motion.hpp"
#include "navkit/errors.hpp"
#include "navkit/heading_labeler.hpp"
#include "navkit/mask_augment.hpp"
#include "navkit/nav_metrics.hpp"
#include "navkit/raster.hpp"
#include "navkit/route_graph.hpp"
#include "navkit/sim_world.hpp"

namespace navkit::dataset_io {

using json = nlohmann::json;

inline constexpr const char* kToolName = "navkit";
inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Low-level file helpers
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileIoError("cannot open file: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw FileIoError("read failure: " + path);
  }
  return bytes;
}

inline void write_file_bytes(const std::string& path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FileIoError("cannot open file for writing: " + path);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FileIoError("write failure: " + path);
  }
}

inline std::string read_file_text(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

inline void write_file_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::span<const std::uint8_t>(
                             reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

/// FNV-1a 64-bit content digest, used in provenance blocks.
inline std::string digest_bytes(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::uint8_t byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

inline std::string digest_file(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return digest_bytes(bytes);
}

/// Provenance block stamped into every generated document: tool identity,
/// the seed, and digests of the inputs it was derived from.
inline json make_provenance(
    std::uint64_t seed,
    const std::vector<std::pair<std::string, std::string>>& input_paths = {}) {
  json inputs = json::object();
  for (const auto& [name, path] : input_paths) {
    inputs[name] = digest_file(path);
  }
  return json{{"tool", kToolName},
              {"version", kToolVersion},
              {"seed", seed},
              {"inputs", inputs}};
}

inline json parse_json_text(const std::string& text, const std::string& where) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw ParseError(0, "invalid JSON in " + where);
  }
  return parsed;
}

inline json read_json_file(const std::string& path) {
  return parse_json_text(read_file_text(path), path);
}

inline void write_json_file(const std::string& path, const json& value) {
  write_file_text(path, value.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Raster container: 16-byte header + little-endian float32 payload
//
//   offset  size  field
//   0       4     magic "NVRS"
//   4       2     version (u16 LE), currently 1
//   6       2     channels (u16 LE), 1 = depth, 2 = flow
//   8       4     width (u32 LE)
//   12      4     height (u32 LE)
//   16      -     width*height*channels float32 LE, row-major,
//                 channel-interleaved
//
// Depth rasters may carry NaN as an explicit invalid-pixel marker.
// ---------------------------------------------------------------------------

inline constexpr std::array<std::uint8_t, 4> kRasterMagic = {'N', 'V', 'R', 'S'};
inline constexpr std::uint16_t kRasterVersion = 1;
inline constexpr std::size_t kRasterHeaderSize = 16;

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t value) {
  out.push_back(static_cast<std::uint8_t>(value & 0xff));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xff));
  }
}

inline std::uint16_t get_u16(const std::uint8_t* at) {
  return static_cast<std::uint16_t>(at[0] | (at[1] << 8));
}

inline std::uint32_t get_u32(const std::uint8_t* at) {
  return static_cast<std::uint32_t>(at[0]) |
         (static_cast<std::uint32_t>(at[1]) << 8) |
         (static_cast<std::uint32_t>(at[2]) << 16) |
         (static_cast<std::uint32_t>(at[3]) << 24);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_raster(const Raster& raster) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(kRasterHeaderSize + raster.data().size() * 4);
  for (std::uint8_t byte : kRasterMagic) bytes.push_back(byte);
  detail::put_u16(bytes, kRasterVersion);
  detail::put_u16(bytes, raster.channels());
  detail::put_u32(bytes, raster.width());
  detail::put_u32(bytes, raster.height());
  for (float value : raster.data()) {
    std::uint32_t pattern;
    std::memcpy(&pattern, &value, 4);
    detail::put_u32(bytes, pattern);
  }
  return bytes;
}

struct RasterHeader {
  std::uint16_t version = 0;
  std::uint16_t channels = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// Validates everything that can be checked without touching the payload:
/// magic, version, channel count, nonzero dimensions, and that the payload
/// length equals exactly what the header declares.
inline RasterHeader decode_raster_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kRasterHeaderSize) {
    throw TruncatedPayload("file shorter than the raster header");
  }
  if (!std::equal(kRasterMagic.begin(), kRasterMagic.end(), bytes.begin())) {
    throw BadMagic("not a raster file (magic mismatch)");
  }
  RasterHeader header;
  header.version = detail::get_u16(bytes.data() + 4);
  header.channels = detail::get_u16(bytes.data() + 6);
  header.width = detail::get_u32(bytes.data() + 8);
  header.height = detail::get_u32(bytes.data() + 12);
  if (header.version != kRasterVersion) {
    throw VersionUnsupported("raster version " + std::to_string(header.version) +
                             " unsupported");
  }
  if (header.channels != 1 && header.channels != 2) {
    throw DimensionMismatch("raster channels must be 1 or 2, got " +
                            std::to_string(header.channels));
  }
  if (header.width == 0 || header.height == 0) {
    throw DimensionMismatch("raster dimensions must be nonzero");
  }
  const std::uint64_t expected =
      static_cast<std::uint64_t>(header.width) * header.height *
      header.channels * 4;
  const std::uint64_t actual = bytes.size() - kRasterHeaderSize;
  if (actual < expected) {
    throw TruncatedPayload("payload holds " + std::to_string(actual) +
                           " bytes, header declares " + std::to_string(expected));
  }
  if (actual > expected) {
    throw TruncatedPayload("trailing bytes after the declared payload");
  }
  return header;
}

inline Raster decode_raster(std::span<const std::uint8_t> bytes) {
  const RasterHeader header = decode_raster_header(bytes);
  Raster raster(header.width, header.height, header.channels);
  const std::uint8_t* at = bytes.data() + kRasterHeaderSize;
  for (float& value : raster.data()) {
    const std::uint32_t pattern = detail::get_u32(at);
    std::memcpy(&value, &pattern, 4);
    at += 4;
  }
  return raster;
}

inline void write_raster(const Raster& raster, const std::string& path) {
  write_file_bytes(path, encode_raster(raster));
}

inline Raster read_raster(const std::string& path) {
  return decode_raster(read_file_bytes(path));
}

/// Header inspection without loading the payload into a raster; still checks
/// that the on-disk length matches the declaration.
inline RasterHeader read_raster_header(const std::string& path) {
  return decode_raster_header(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Target encoding: a black circle on a white canvas whose center position
// encodes the target. Targets are laid out row-major on a ceil(sqrt(n)) grid,
// so a given target set always maps to the same canvas.
// ---------------------------------------------------------------------------

struct TargetEncoding {
  std::string target_id;
  Raster canvas;
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
};

namespace detail {

struct TargetLayout {
  std::uint32_t grid = 0;
  double cell = 0.0;
};

inline TargetLayout target_layout(std::size_t target_count,
                                  std::uint32_t canvas_size, double radius) {
  TargetLayout layout;
  layout.grid = static_cast<std::uint32_t>(
      std::ceil(std::sqrt(static_cast<double>(target_count))));
  layout.grid = std::max(layout.grid, 1u);
  layout.cell = static_cast<double>(canvas_size) / layout.grid;
  if (layout.cell < 2.0 * radius) {
    throw TooManyTargets("a " + std::to_string(layout.grid) + "x" +
                         std::to_string(layout.grid) +
                         " grid leaves less than one circle diameter per cell");
  }
  return layout;
}

inline std::pair<double, double> target_center(std::size_t index,
                                               const TargetLayout& layout) {
  const std::size_t row = index / layout.grid;
  const std::size_t col = index % layout.grid;
  return {(col + 0.5) * layout.cell, (row + 0.5) * layout.cell};
}

}  // namespace detail

inline TargetEncoding encode_target(const std::string& target_id,
                                    std::span<const std::string> target_set,
                                    std::uint32_t canvas_size = 128,
                                    double radius = 8.0) {
  const auto it = std::find(target_set.begin(), target_set.end(), target_id);
  if (it == target_set.end()) {
    throw UnknownTarget("target not in the declared set: " + target_id);
  }
  const std::size_t index = static_cast<std::size_t>(it - target_set.begin());
  const detail::TargetLayout layout =
      detail::target_layout(target_set.size(), canvas_size, radius);
  const auto [cx, cy] = detail::target_center(index, layout);

  TargetEncoding encoding;
  encoding.target_id = target_id;
  encoding.center_x = cx;
  encoding.center_y = cy;
  encoding.radius = radius;
  encoding.canvas = Raster(canvas_size, canvas_size, 1, 1.0f);  // white
  for (std::uint32_t y = 0; y < canvas_size; ++y) {
    for (std::uint32_t x = 0; x < canvas_size; ++x) {
      const double dx = (x + 0.5) - cx;
      const double dy = (y + 0.5) - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        encoding.canvas.at(x, y) = 0.0f;  // black
      }
    }
  }
  return encoding;
}

/// Recovers the target whose layout center is nearest to the centroid of the
/// canvas' dark pixels.
inline std::string decode_target(const Raster& canvas,
                                 std::span<const std::string> target_set,
                                 double radius = 8.0) {
  if (canvas.channels() != 1) {
    throw DimensionMismatch("target canvas must be single channel");
  }
  double sum_x = 0.0, sum_y = 0.0;
  std::uint64_t dark = 0;
  for (std::uint32_t y = 0; y < canvas.height(); ++y) {
    for (std::uint32_t x = 0; x < canvas.width(); ++x) {
      if (canvas.at(x, y) < 0.5f) {
        sum_x += x + 0.5;
        sum_y += y + 0.5;
        ++dark;
      }
    }
  }
  if (dark == 0) {
    throw UnknownTarget("canvas carries no mark");
  }
  const double cx = sum_x / dark;
  const double cy = sum_y / dark;
  const detail::TargetLayout layout =
      detail::target_layout(target_set.size(), canvas.width(), radius);
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < target_set.size(); ++i) {
    const auto [tx, ty] = detail::target_center(i, layout);
    const double d = (tx - cx) * (tx - cx) + (ty - cy) * (ty - cy);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return target_set[best];
}

// ---------------------------------------------------------------------------
// Topological map + triplet annotations: line-based text format.
//
//   # comment
//   format_version 1
//   [nodes]
//   <node_id>
//   [edges]
//   <edge_id> <node_a> <node_b> <weight_frames>
//   [triplets]
//   <incoming> <node> <outgoing|-> <video_id> <frame_start> <frame_end> fwd|rev
// ---------------------------------------------------------------------------

struct MapDocument {
  route_graph::TopologicalMap map;
  std::vector<route_graph::TripletAnnotation> annotations;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

inline std::int64_t parse_int(const std::string& token, std::size_t line,
                              const std::string& what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer for " + what + ", got '" +
                               token + "'");
  }
}

inline double parse_double(const std::string& token, std::size_t line,
                           const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size() || !std::isfinite(value)) {
      throw std::invalid_argument(token);
    }
    return value;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number for " + what + ", got '" +
                               token + "'");
  }
}

}  // namespace detail

inline MapDocument parse_map_text(const std::string& text) {
  MapDocument doc;
  std::set<route_graph::TripletKey> seen_keys;
  enum class Section { header, nodes, edges, triplets };
  Section section = Section::header;
  bool version_seen = false;

  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::vector<std::string> tokens = detail::split_tokens(line);
    if (tokens.empty() || tokens[0].starts_with('#')) continue;

    if (tokens[0] == "format_version") {
      if (tokens.size() != 2) throw ParseError(line_no, "format_version needs one value");
      const std::int64_t version =
          detail::parse_int(tokens[1], line_no, "format_version");
      if (version != 1) {
        throw VersionUnsupported("map format_version " + tokens[1] +
                                 " unsupported");
      }
      version_seen = true;
      continue;
    }
    if (tokens[0] == "[nodes]") { section = Section::nodes; continue; }
    if (tokens[0] == "[edges]") { section = Section::edges; continue; }
    if (tokens[0] == "[triplets]") { section = Section::triplets; continue; }
    if (tokens[0].starts_with('[')) {
      throw ParseError(line_no, "unknown section " + tokens[0]);
    }
    if (!version_seen) {
      throw ParseError(line_no, "format_version must precede all records");
    }

    switch (section) {
      case Section::header:
        throw ParseError(line_no, "record before any section header");
      case Section::nodes:
        if (tokens.size() != 1) {
          throw ParseError(line_no, "node records carry exactly one id");
        }
        doc.map.add_node(tokens[0]);
        break;
      case Section::edges: {
        if (tokens.size() != 4) {
          throw ParseError(line_no,
                           "edge records need: id node_a node_b weight_frames");
        }
        doc.map.add_edge(tokens[1], tokens[2], tokens[0],
                         detail::parse_int(tokens[3], line_no, "edge weight"));
        break;
      }
      case Section::triplets: {
        if (tokens.size() != 7) {
          throw ParseError(line_no,
                           "triplet records need: incoming node outgoing "
                           "video_id frame_start frame_end fwd|rev");
        }
        route_graph::TripletAnnotation annotation;
        annotation.incoming_edge = tokens[0];
        annotation.through_node = tokens[1];
        annotation.outgoing_edge = tokens[2];
        annotation.segment.video_id = tokens[3];
        annotation.segment.frame_start =
            detail::parse_int(tokens[4], line_no, "frame_start");
        annotation.segment.frame_end =
            detail::parse_int(tokens[5], line_no, "frame_end");
        if (tokens[6] == "fwd") {
          annotation.segment.reversed = false;
        } else if (tokens[6] == "rev") {
          annotation.segment.reversed = true;
        } else {
          throw ParseError(line_no, "direction must be fwd or rev, got '" +
                                        tokens[6] + "'");
        }
        route_graph::validate_annotation(doc.map, annotation);
        if (!seen_keys.insert(route_graph::key_of(annotation)).second) {
          throw DuplicateTriplet("duplicate triplet " +
                                 route_graph::key_of(annotation).to_string());
        }
        doc.annotations.push_back(std::move(annotation));
        break;
      }
    }
  }
  if (!version_seen) {
    throw ParseError(line_no, "missing format_version header");
  }
  return doc;
}

inline MapDocument load_map(const std::string& path) {
  return parse_map_text(read_file_text(path));
}

inline std::string format_map_text(const MapDocument& doc) {
  std::ostringstream out;
  out << "# navkit topological map\n";
  out << "format_version 1\n\n[nodes]\n";
  for (const auto& node : doc.map.nodes()) out << node << "\n";
  out << "\n[edges]\n";
  for (const auto& [id, edge] : doc.map.edges()) {
    out << id << " " << edge.a << " " << edge.b << " " << edge.weight_frames
        << "\n";
  }
  out << "\n[triplets]\n";
  for (const auto& annotation : doc.annotations) {
    out << annotation.incoming_edge << " " << annotation.through_node << " "
        << annotation.outgoing_edge << " " << annotation.segment.video_id << " "
        << annotation.segment.frame_start << " " << annotation.segment.frame_end
        << " " << (annotation.segment.reversed ? "rev" : "fwd") << "\n";
  }
  return out.str();
}

inline void save_map(const MapDocument& doc, const std::string& path) {
  write_file_text(path, format_map_text(doc));
}

// ---------------------------------------------------------------------------
// Scene plan: line-based text format.
//
//   format_version 1
//   floor <y>
//   ceiling <y>
//   [walls]
//   <x|z> <plane> <lo> <hi>
// ---------------------------------------------------------------------------

inline sim_world::ScenePlan parse_scene_text(const std::string& text) {
  sim_world::ScenePlan scene;
  bool version_seen = false;
  bool in_walls = false;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::vector<std::string> tokens = detail::split_tokens(line);
    if (tokens.empty() || tokens[0].starts_with('#')) continue;
    if (tokens[0] == "format_version") {
      if (tokens.size() != 2) throw ParseError(line_no, "format_version needs one value");
      if (detail::parse_int(tokens[1], line_no, "format_version") != 1) {
        throw VersionUnsupported("scene format_version " + tokens[1] +
                                 " unsupported");
      }
      version_seen = true;
      continue;
    }
    if (!version_seen) {
      throw ParseError(line_no, "format_version must precede all records");
    }
    if (tokens[0] == "floor" || tokens[0] == "ceiling") {
      if (tokens.size() != 2) throw ParseError(line_no, tokens[0] + " needs one value");
      const double y = detail::parse_double(tokens[1], line_no, tokens[0]);
      (tokens[0] == "floor" ? scene.floor_y : scene.ceiling_y) = y;
      continue;
    }
    if (tokens[0] == "[walls]") { in_walls = true; continue; }
    if (tokens[0].starts_with('[')) {
      throw ParseError(line_no, "unknown section " + tokens[0]);
    }
    if (!in_walls) throw ParseError(line_no, "wall record before [walls]");
    if (tokens.size() != 4) {
      throw ParseError(line_no, "wall records need: axis plane lo hi");
    }
    sim_world::Wall wall;
    if (tokens[0] == "x") {
      wall.axis = 0;
    } else if (tokens[0] == "z") {
      wall.axis = 2;
    } else {
      throw ParseError(line_no, "wall axis must be x or z, got '" + tokens[0] + "'");
    }
    wall.plane = detail::parse_double(tokens[1], line_no, "wall plane");
    wall.lo = detail::parse_double(tokens[2], line_no, "wall lo");
    wall.hi = detail::parse_double(tokens[3], line_no, "wall hi");
    if (!(wall.lo < wall.hi)) {
      throw InvariantViolation("wall extent must satisfy lo < hi");
    }
    scene.walls.push_back(wall);
  }
  if (!version_seen) throw ParseError(line_no, "missing format_version header");
  if (!(scene.floor_y < scene.ceiling_y)) {
    throw InvariantViolation("scene floor must lie below the ceiling");
  }
  return scene;
}

inline sim_world::ScenePlan load_scene(const std::string& path) {
  return parse_scene_text(read_file_text(path));
}

inline std::string format_scene_text(const sim_world::ScenePlan& scene) {
  std::ostringstream out;
  out << "# navkit scene plan\nformat_version 1\n";
  out << "floor " << scene.floor_y << "\nceiling " << scene.ceiling_y << "\n";
  out << "\n[walls]\n";
  for (const sim_world::Wall& wall : scene.walls) {
    out << (wall.axis == 0 ? "x" : "z") << " " << wall.plane << " " << wall.lo
        << " " << wall.hi << "\n";
  }
  return out.str();
}

inline void save_scene(const sim_world::ScenePlan& scene,
                       const std::string& path) {
  write_file_text(path, format_scene_text(scene));
}

// ---------------------------------------------------------------------------
// JSON documents: intrinsics, trajectories, yaw series, labels, mask plans,
// synthetic paths, evaluation reports, dataset manifests.
// ---------------------------------------------------------------------------

inline json intrinsics_to_json(const camera_motion::CameraIntrinsics& intrinsics) {
  return json{{"focal_length", intrinsics.focal_length},
              {"pixel_pitch", intrinsics.pixel_pitch},
              {"principal_point", {intrinsics.cx, intrinsics.cy}},
              {"image_size", {intrinsics.width, intrinsics.height}}};
}

inline camera_motion::CameraIntrinsics intrinsics_from_json(const json& value) {
  try {
    camera_motion::CameraIntrinsics intrinsics;
    intrinsics.focal_length = value.at("focal_length").get<double>();
    intrinsics.pixel_pitch = value.at("pixel_pitch").get<double>();
    intrinsics.cx = value.at("principal_point").at(0).get<double>();
    intrinsics.cy = value.at("principal_point").at(1).get<double>();
    intrinsics.width = value.at("image_size").at(0).get<std::uint32_t>();
    intrinsics.height = value.at("image_size").at(1).get<std::uint32_t>();
    intrinsics.validate();
    return intrinsics;
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad intrinsics document: ") + error.what());
  }
}

inline void save_intrinsics(const camera_motion::CameraIntrinsics& intrinsics,
                            const std::string& path) {
  json doc = intrinsics_to_json(intrinsics);
  doc["schema_version"] = 1;
  write_json_file(path, doc);
}

inline camera_motion::CameraIntrinsics load_intrinsics(const std::string& path) {
  return intrinsics_from_json(read_json_file(path));
}

inline void save_trajectory(const sim_world::Trajectory& trajectory,
                            const std::string& path) {
  json poses = json::array();
  for (const sim_world::CameraPose& pose : trajectory.poses) {
    poses.push_back({pose.position.x(), pose.position.y(), pose.position.z(),
                     pose.yaw, pose.pitch, pose.roll});
  }
  write_json_file(path, json{{"schema_version", 1},
                             {"fps", trajectory.fps},
                             {"poses", poses}});
}

inline sim_world::Trajectory load_trajectory(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    sim_world::Trajectory trajectory;
    trajectory.fps = doc.at("fps").get<double>();
    for (const json& entry : doc.at("poses")) {
      sim_world::CameraPose pose;
      pose.position = {entry.at(0).get<double>(), entry.at(1).get<double>(),
                       entry.at(2).get<double>()};
      pose.yaw = entry.at(3).get<double>();
      pose.pitch = entry.at(4).get<double>();
      pose.roll = entry.at(5).get<double>();
      trajectory.poses.push_back(pose);
    }
    return trajectory;
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad trajectory document: ") + error.what());
  }
}

inline void save_yaw_series(const heading_labeler::YawSeries& series,
                            const std::string& path,
                            const std::vector<double>& residuals = {},
                            const json& provenance = json::object()) {
  json doc{{"schema_version", 1},
           {"fps", series.fps},
           {"values", series.values},
           {"provenance", provenance}};
  if (!residuals.empty()) doc["rms_residuals"] = residuals;
  write_json_file(path, doc);
}

inline heading_labeler::YawSeries load_yaw_series(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    heading_labeler::YawSeries series;
    series.fps = doc.at("fps").get<double>();
    series.values = doc.at("values").get<std::vector<double>>();
    return series;
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad yaw series document: ") + error.what());
  }
}

inline void save_labels(const heading_labeler::DirectionLabelSeries& labels,
                        const std::string& path,
                        const json& provenance = json::object()) {
  std::vector<int> indices;
  indices.reserve(labels.labels.size());
  for (const heading_labeler::DirectionClass& label : labels.labels) {
    indices.push_back(label.index);
  }
  write_json_file(path, json{{"schema_version", 1},
                             {"labels", indices},
                             {"provenance", provenance}});
}

inline heading_labeler::DirectionLabelSeries load_labels(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    heading_labeler::DirectionLabelSeries labels;
    for (const json& entry : doc.at("labels")) {
      const int index = entry.get<int>();
      if (index < 0 || index >= heading_labeler::kDirectionClasses) {
        throw InvariantViolation("label out of range: " + std::to_string(index));
      }
      labels.labels.push_back({static_cast<std::uint8_t>(index)});
    }
    return labels;
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad label document: ") + error.what());
  }
}

inline void save_mask_plan(const mask_augment::MaskPlan& plan,
                           mask_augment::ImageSize size, const std::string& path,
                           const json& provenance = json::object()) {
  json boxes = json::array();
  for (const mask_augment::MaskBox& box : plan.boxes) {
    boxes.push_back(
        {{"x", box.x}, {"y", box.y}, {"width", box.width}, {"height", box.height}});
  }
  write_json_file(path,
                  json{{"schema_version", 1},
                       {"image_size", {size.width, size.height}},
                       {"boxes", boxes},
                       {"fill",
                        {{"family", "uniform"},
                         {"seed", plan.fill.seed},
                         {"range", {plan.fill.lo, plan.fill.hi}}}},
                       {"provenance", provenance}});
}

inline std::pair<mask_augment::MaskPlan, mask_augment::ImageSize> load_mask_plan(
    const std::string& path) {
  const json doc = read_json_file(path);
  try {
    mask_augment::MaskPlan plan;
    mask_augment::ImageSize size;
    size.width = doc.at("image_size").at(0).get<std::uint32_t>();
    size.height = doc.at("image_size").at(1).get<std::uint32_t>();
    for (const json& entry : doc.at("boxes")) {
      mask_augment::MaskBox box;
      box.x = entry.at("x").get<std::int64_t>();
      box.y = entry.at("y").get<std::int64_t>();
      box.width = entry.at("width").get<std::int64_t>();
      box.height = entry.at("height").get<std::int64_t>();
      if (!box.inside(size)) {
        throw InvariantViolation("mask box outside the declared image size");
      }
      plan.boxes.push_back(box);
    }
    plan.fill.seed = doc.at("fill").at("seed").get<std::uint64_t>();
    plan.fill.lo = doc.at("fill").at("range").at(0).get<double>();
    plan.fill.hi = doc.at("fill").at("range").at(1).get<double>();
    return {plan, size};
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad mask plan document: ") + error.what());
  }
}

inline json synthetic_path_to_json(const route_graph::SyntheticPath& path) {
  json triplets = json::array();
  for (const route_graph::TripletAnnotation& triplet : path.triplets) {
    triplets.push_back({{"incoming", triplet.incoming_edge},
                        {"node", triplet.through_node},
                        {"outgoing", triplet.outgoing_edge},
                        {"video_id", triplet.segment.video_id},
                        {"frame_start", triplet.segment.frame_start},
                        {"frame_end", triplet.segment.frame_end},
                        {"reversed", triplet.segment.reversed}});
  }
  return json{{"start", path.start_node},
              {"goal", path.goal_node},
              {"triplets", triplets}};
}

inline route_graph::SyntheticPath synthetic_path_from_json(const json& value) {
  try {
    route_graph::SyntheticPath path;
    path.start_node = value.at("start").get<std::string>();
    path.goal_node = value.at("goal").get<std::string>();
    for (const json& entry : value.at("triplets")) {
      route_graph::TripletAnnotation triplet;
      triplet.incoming_edge = entry.at("incoming").get<std::string>();
      triplet.through_node = entry.at("node").get<std::string>();
      triplet.outgoing_edge = entry.at("outgoing").get<std::string>();
      triplet.segment.video_id = entry.at("video_id").get<std::string>();
      triplet.segment.frame_start = entry.at("frame_start").get<std::int64_t>();
      triplet.segment.frame_end = entry.at("frame_end").get<std::int64_t>();
      triplet.segment.reversed = entry.at("reversed").get<bool>();
      path.triplets.push_back(std::move(triplet));
    }
    return path;
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad synthetic path document: ") + error.what());
  }
}

inline void save_paths(const std::vector<route_graph::SyntheticPath>& paths,
                       const std::string& path,
                       const json& provenance = json::object()) {
  json entries = json::array();
  for (const route_graph::SyntheticPath& entry : paths) {
    entries.push_back(synthetic_path_to_json(entry));
  }
  write_json_file(path, json{{"schema_version", 1},
                             {"paths", entries},
                             {"provenance", provenance}});
}

inline std::vector<route_graph::SyntheticPath> load_paths(const std::string& path) {
  const json doc = read_json_file(path);
  std::vector<route_graph::SyntheticPath> paths;
  try {
    for (const json& entry : doc.at("paths")) {
      paths.push_back(synthetic_path_from_json(entry));
    }
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad paths document: ") + error.what());
  }
  return paths;
}

inline json report_to_json(const nav_metrics::EvaluationReport& report) {
  json confusion = json::array();
  for (const auto& row : report.confusion) {
    confusion.push_back(row);
  }
  return json{{"accuracy", report.accuracy},
              {"f1_binary", report.f1_binary},
              {"f1_binary_degenerate", report.f1_binary_degenerate},
              {"f1_macro_turns", report.f1_macro_turns},
              {"mean_angle_error_deg", report.mean_angle_error_deg},
              {"frames", report.frames},
              {"confusion", confusion}};
}

// ---------------------------------------------------------------------------
// Dataset manifest: the episode index tying rasters, series and labels
// together. Loading verifies that every referenced file exists, that raster
// headers agree with the declared intrinsics, and that frame counts are
// consistent across the episode's artifacts.
// ---------------------------------------------------------------------------

struct EpisodeRecord {
  std::string video_id;
  double fps = 30.0;
  std::uint64_t frame_count = 0;  ///< number of frame transitions
  camera_motion::CameraIntrinsics intrinsics;
  std::vector<std::string> flow_paths;
  std::vector<std::string> depth_paths;
  std::string yaw_path;    ///< optional, empty when absent
  std::string label_path;  ///< optional
  std::string map_path;    ///< optional
};

struct DatasetManifest {
  std::vector<EpisodeRecord> episodes;
  json provenance = json::object();
};

inline void save_manifest(const DatasetManifest& manifest,
                          const std::string& path) {
  json episodes = json::array();
  for (const EpisodeRecord& episode : manifest.episodes) {
    json entry{{"video_id", episode.video_id},
               {"fps", episode.fps},
               {"frame_count", episode.frame_count},
               {"intrinsics", intrinsics_to_json(episode.intrinsics)},
               {"flow", episode.flow_paths},
               {"depth", episode.depth_paths}};
    if (!episode.yaw_path.empty()) entry["yaw_series"] = episode.yaw_path;
    if (!episode.label_path.empty()) entry["labels"] = episode.label_path;
    if (!episode.map_path.empty()) entry["map"] = episode.map_path;
    episodes.push_back(entry);
  }
  write_json_file(path, json{{"schema_version", 1},
                             {"episodes", episodes},
                             {"provenance", manifest.provenance}});
}

inline DatasetManifest load_manifest(const std::string& path,
                                     bool validate = true) {
  const json doc = read_json_file(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  DatasetManifest manifest;
  try {
    if (doc.at("schema_version").get<int>() != 1) {
      throw VersionUnsupported("manifest schema_version unsupported");
    }
    if (doc.contains("provenance")) manifest.provenance = doc.at("provenance");
    for (const json& entry : doc.at("episodes")) {
      EpisodeRecord episode;
      episode.video_id = entry.at("video_id").get<std::string>();
      episode.fps = entry.at("fps").get<double>();
      episode.frame_count = entry.at("frame_count").get<std::uint64_t>();
      episode.intrinsics = intrinsics_from_json(entry.at("intrinsics"));
      const auto resolve = [&](const std::string& relative) {
        return (base / relative).string();
      };
      for (const json& p : entry.at("flow")) {
        episode.flow_paths.push_back(resolve(p.get<std::string>()));
      }
      for (const json& p : entry.at("depth")) {
        episode.depth_paths.push_back(resolve(p.get<std::string>()));
      }
      if (entry.contains("yaw_series")) {
        episode.yaw_path = resolve(entry.at("yaw_series").get<std::string>());
      }
      if (entry.contains("labels")) {
        episode.label_path = resolve(entry.at("labels").get<std::string>());
      }
      if (entry.contains("map")) {
        episode.map_path = resolve(entry.at("map").get<std::string>());
      }
      manifest.episodes.push_back(std::move(episode));
    }
  } catch (const json::exception& error) {
    throw ParseError(0, std::string("bad manifest document: ") + error.what());
  }

  if (validate) {
    for (const EpisodeRecord& episode : manifest.episodes) {
      if (episode.flow_paths.size() != episode.frame_count ||
          episode.depth_paths.size() != episode.frame_count) {
        throw InvariantViolation("episode " + episode.video_id +
                                 " raster counts disagree with frame_count");
      }
      const auto check_raster = [&](const std::string& raster_path,
                                    std::uint16_t channels) {
        const RasterHeader header = read_raster_header(raster_path);
        if (header.channels != channels ||
            header.width != episode.intrinsics.width ||
            header.height != episode.intrinsics.height) {
          throw InvariantViolation("raster " + raster_path +
                                   " disagrees with episode intrinsics");
        }
      };
      for (const std::string& p : episode.flow_paths) check_raster(p, 2);
      for (const std::string& p : episode.depth_paths) check_raster(p, 1);
      if (!episode.yaw_path.empty()) {
        const heading_labeler::YawSeries series = load_yaw_series(episode.yaw_path);
        if (series.values.size() != episode.frame_count) {
          throw InvariantViolation("yaw series length disagrees with frame_count");
        }
      }
      if (!episode.label_path.empty()) {
        const heading_labeler::DirectionLabelSeries labels =
            load_labels(episode.label_path);
        if (labels.labels.size() != episode.frame_count) {
          throw InvariantViolation("label series length disagrees with frame_count");
        }
      }
      if (!episode.map_path.empty()) {
        load_map(episode.map_path);
      }
    }
  }
  return manifest;
}

}  // namespace navkit::dataset_io
