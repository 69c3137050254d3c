#pragma once

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "navkit/camera_motion.hpp"
#include "navkit/route_graph.hpp"
#include "navkit/rng.hpp"

namespace testutil {

inline navkit::camera_motion::CameraIntrinsics make_intrinsics(
    std::uint32_t width = 640, std::uint32_t height = 480,
    double focal_length = 500.0) {
  navkit::camera_motion::CameraIntrinsics intrinsics;
  intrinsics.focal_length = focal_length;
  intrinsics.pixel_pitch = 1.0;
  intrinsics.cx = (width - 1) / 2.0;
  intrinsics.cy = (height - 1) / 2.0;
  intrinsics.width = width;
  intrinsics.height = height;
  return intrinsics;
}

inline std::vector<navkit::camera_motion::PixelSample> random_samples(
    navkit::Rng& rng, const navkit::camera_motion::CameraIntrinsics& intrinsics,
    std::size_t count, double depth_lo = 1.0, double depth_hi = 10.0) {
  std::vector<navkit::camera_motion::PixelSample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    navkit::camera_motion::PixelSample sample;
    sample.u = rng.uniform(-intrinsics.cx, intrinsics.width - 1 - intrinsics.cx);
    sample.v = rng.uniform(-intrinsics.cy, intrinsics.height - 1 - intrinsics.cy);
    sample.depth = rng.uniform(depth_lo, depth_hi);
    samples.push_back(sample);
  }
  return samples;
}

inline navkit::camera_motion::MotionVector random_motion(navkit::Rng& rng,
                                                         double magnitude) {
  return {rng.uniform(-magnitude, magnitude), rng.uniform(-magnitude, magnitude),
          rng.uniform(-magnitude, magnitude), rng.uniform(-magnitude, magnitude),
          rng.uniform(-magnitude, magnitude), rng.uniform(-magnitude, magnitude)};
}

inline void attach_flow(std::vector<navkit::camera_motion::PixelSample>& samples,
                        const std::vector<navkit::camera_motion::PixelFlow>& flows) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].flow_u = flows[i].u_dot;
    samples[i].flow_v = flows[i].v_dot;
  }
}

inline double motion_distance(const navkit::camera_motion::MotionVector& a,
                              const navkit::camera_motion::MotionVector& b) {
  const std::array<double, 6> d = {a.v_x - b.v_x,         a.v_y - b.v_y,
                                   a.v_z - b.v_z,         a.omega_x - b.omega_x,
                                   a.omega_y - b.omega_y, a.omega_z - b.omega_z};
  double sum = 0.0;
  for (double value : d) sum += value * value;
  return std::sqrt(sum);
}

inline double motion_norm(const navkit::camera_motion::MotionVector& m) {
  return motion_distance(m, {});
}

/// Independent least-squares route for cross-checking: forms the normal
/// equations by plain summation and solves the 6x6 system with hand-rolled
/// Gaussian elimination. No SVD, no Eigen solve.
inline navkit::camera_motion::MotionVector solve_normal_equations(
    std::span<const navkit::camera_motion::PixelSample> samples,
    const navkit::camera_motion::CameraIntrinsics& intrinsics) {
  double ata[6][6] = {};
  double atb[6] = {};
  for (const auto& sample : samples) {
    const double f = intrinsics.focal_length;
    const double rho = intrinsics.pixel_pitch;
    const double u = sample.u;
    const double v = sample.v;
    const double z = sample.depth;
    const double row_u[6] = {-f / (rho * z), 0.0, u / z, rho * u * v / f,
                             (f * f + rho * rho * u * u) / (rho * f), v};
    const double row_v[6] = {0.0, -f / (rho * z), v / z,
                             (f * f + rho * rho * v * v) / (rho * f),
                             rho * u * v / f, -u};
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        ata[i][j] += row_u[i] * row_u[j] + row_v[i] * row_v[j];
      }
      atb[i] += row_u[i] * sample.flow_u + row_v[i] * sample.flow_v;
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < 6; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 6; ++row) {
      if (std::abs(ata[row][col]) > std::abs(ata[pivot][col])) pivot = row;
    }
    std::swap(ata[col], ata[pivot]);
    std::swap(atb[col], atb[pivot]);
    for (int row = col + 1; row < 6; ++row) {
      const double factor = ata[row][col] / ata[col][col];
      for (int j = col; j < 6; ++j) ata[row][j] -= factor * ata[col][j];
      atb[row] -= factor * atb[col];
    }
  }
  double x[6];
  for (int row = 5; row >= 0; --row) {
    double sum = atb[row];
    for (int j = row + 1; j < 6; ++j) sum -= ata[row][j] * x[j];
    x[row] = sum / ata[row][row];
  }
  return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

// --------------------------------------------------------------------------
// Graph oracles
// --------------------------------------------------------------------------

/// Exhaustive shortest-path oracle: enumerates every simple path with DFS and
/// keeps the minimum total weight (and its lexicographically smallest node
/// sequence). Only for small graphs.
struct BruteForceResult {
  bool reachable = false;
  std::int64_t weight = 0;
  std::vector<std::string> nodes;
};

inline void brute_force_walk(const navkit::route_graph::TopologicalMap& map,
                             const std::string& current, const std::string& goal,
                             std::vector<std::string>& stack,
                             std::int64_t weight_so_far,
                             BruteForceResult& best) {
  if (current == goal) {
    if (!best.reachable || weight_so_far < best.weight ||
        (weight_so_far == best.weight && stack < best.nodes)) {
      best.reachable = true;
      best.weight = weight_so_far;
      best.nodes = stack;
    }
    return;
  }
  for (const auto& edge_id : map.incident(current)) {
    const auto& edge = map.edge(edge_id);
    const std::string next = edge.other(current);
    if (std::find(stack.begin(), stack.end(), next) != stack.end()) continue;
    stack.push_back(next);
    brute_force_walk(map, next, goal, stack, weight_so_far + edge.weight_frames,
                     best);
    stack.pop_back();
  }
}

inline BruteForceResult brute_force_shortest(
    const navkit::route_graph::TopologicalMap& map, const std::string& start,
    const std::string& goal) {
  BruteForceResult best;
  std::vector<std::string> stack = {start};
  brute_force_walk(map, start, goal, stack, 0, best);
  return best;
}

/// Random connected-ish graph with up to `max_nodes` nodes. Node ids are
/// single letters, edge weights are small positive integers.
inline navkit::route_graph::TopologicalMap random_graph(navkit::Rng& rng,
                                                        int max_nodes,
                                                        double edge_probability,
                                                        int max_weight = 20) {
  navkit::route_graph::TopologicalMap map;
  const int n = 2 + static_cast<int>(rng.uniform_index(max_nodes - 1));
  for (int i = 0; i < n; ++i) {
    map.add_node(std::string(1, static_cast<char>('A' + i)));
  }
  int edge_counter = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_probability) {
        map.add_edge(std::string(1, static_cast<char>('A' + i)),
                     std::string(1, static_cast<char>('A' + j)),
                     "e" + std::to_string(edge_counter++),
                     1 + static_cast<std::int64_t>(rng.uniform_index(max_weight)));
      }
    }
  }
  return map;
}

/// Annotates every ordered (incoming, node, outgoing) triple of the map.
inline std::vector<navkit::route_graph::TripletAnnotation> annotate_fully(
    const navkit::route_graph::TopologicalMap& map) {
  std::vector<navkit::route_graph::TripletAnnotation> annotations;
  std::int64_t frame = 0;
  for (const auto& node : map.nodes()) {
    for (const auto& in : map.incident(node)) {
      for (const auto& out : map.incident(node)) {
        if (in == out) continue;
        navkit::route_graph::TripletAnnotation annotation;
        annotation.incoming_edge = in;
        annotation.through_node = node;
        annotation.outgoing_edge = out;
        annotation.segment.video_id = "vid_" + node;
        annotation.segment.frame_start = frame;
        annotation.segment.frame_end = frame + 90;
        frame += 90;
        annotations.push_back(annotation);
      }
    }
  }
  return annotations;
}

/// Scratch directory for file-format tests, cleaned up on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    base_ = std::filesystem::temp_directory_path() /
            ("navkit_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(base_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(base_, ec);
  }
  std::string path(const std::string& name) const {
    return (base_ / name).string();
  }

 private:
  std::filesystem::path base_;
};

}  // namespace testutil
