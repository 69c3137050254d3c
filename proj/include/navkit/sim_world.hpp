#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "navkit/camera_motion.hpp"
#include "navkit/errors.hpp"
#include "navkit/heading_labeler.hpp"
#include "navkit/raster.hpp"

namespace navkit::sim_world {

using camera_motion::CameraIntrinsics;
using camera_motion::MotionVector;

/// Vertical wall slab, axis aligned. axis == 0 places the wall on the plane
/// x = plane with its extent along z; axis == 2 places it on z = plane with
/// the extent along x. Walls span floor to ceiling.
struct Wall {
  int axis = 0;
  double plane = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed axis-aligned world: every ray from a valid camera position hits a
/// wall, the floor or the ceiling. World frame is y-up.
struct ScenePlan {
  double floor_y = 0.0;
  double ceiling_y = 3.0;
  std::vector<Wall> walls;

  /// Builds a scene from an ASCII floor plan ('#' solid, '.' free), one cell
  /// per `cell_size` world units. Row r spans z in [r*cell, (r+1)*cell],
  /// column c spans x likewise. Colinear wall faces are merged into runs.
  static ScenePlan from_ascii(const std::vector<std::string>& rows,
                              double cell_size, double floor_y = 0.0,
                              double ceiling_y = 3.0);
};

/// Camera pose in the world frame. Yaw is the rotation about the vertical
/// axis, positive toward the left (counter-clockwise seen from above); at
/// yaw 0 the camera looks along +x. Pitch tilts the view up for positive
/// values; roll banks the camera clockwise for positive values.
struct CameraPose {
  Eigen::Vector3d position{0.0, 0.0, 0.0};
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  /// Camera-to-world rotation. The camera frame is x right, y down,
  /// z forward.
  Eigen::Matrix3d rotation() const {
    Eigen::Matrix3d base;  // camera axes at yaw = 0
    base << 0, 0, 1,       // x_cam -> +z_w
            0, -1, 0,      // y_cam -> -y_w
            1, 0, 0;       // z_cam -> +x_w
    const Eigen::Matrix3d spin =
        Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const Eigen::Matrix3d tilt =
        Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Matrix3d bank =
        Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return spin * base * tilt * bank;
  }
};

struct Trajectory {
  std::vector<CameraPose> poses;
  double fps = 30.0;
};

inline ScenePlan ScenePlan::from_ascii(const std::vector<std::string>& rows,
                                       double cell_size, double floor_y,
                                       double ceiling_y) {
  ScenePlan scene;
  scene.floor_y = floor_y;
  scene.ceiling_y = ceiling_y;
  const std::size_t n_rows = rows.size();
  auto solid = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(n_rows)) return true;
    const std::string& row = rows[r];
    if (c >= static_cast<std::ptrdiff_t>(row.size())) return true;
    return row[c] == '#';
  };

  std::size_t width = 0;
  for (const std::string& row : rows) width = std::max(width, row.size());

  // Faces normal to z (rows of constant z), merged along x.
  for (std::ptrdiff_t r = 0; r <= static_cast<std::ptrdiff_t>(n_rows); ++r) {
    std::ptrdiff_t run_start = -1;
    for (std::ptrdiff_t c = 0; c <= static_cast<std::ptrdiff_t>(width); ++c) {
      const bool face = c < static_cast<std::ptrdiff_t>(width) &&
                        solid(r - 1, c) != solid(r, c);
      if (face && run_start < 0) run_start = c;
      if (!face && run_start >= 0) {
        scene.walls.push_back({2, r * cell_size, run_start * cell_size,
                               c * cell_size});
        run_start = -1;
      }
    }
  }
  // Faces normal to x (columns of constant x), merged along z.
  for (std::ptrdiff_t c = 0; c <= static_cast<std::ptrdiff_t>(width); ++c) {
    std::ptrdiff_t run_start = -1;
    for (std::ptrdiff_t r = 0; r <= static_cast<std::ptrdiff_t>(n_rows); ++r) {
      const bool face = r < static_cast<std::ptrdiff_t>(n_rows) &&
                        solid(r, c - 1) != solid(r, c);
      if (face && run_start < 0) run_start = r;
      if (!face && run_start >= 0) {
        scene.walls.push_back({0, c * cell_size, run_start * cell_size,
                               r * cell_size});
        run_start = -1;
      }
    }
  }
  return scene;
}

namespace detail {

/// Distance along `dir` from `origin` to the nearest surface, or a negative
/// value when the ray escapes the scene.
inline double raycast(const ScenePlan& scene, const Eigen::Vector3d& origin,
                      const Eigen::Vector3d& dir) {
  constexpr double kEps = 1e-12;
  constexpr double kEdge = 1e-9;
  double best = -1.0;
  for (const Wall& wall : scene.walls) {
    const double denom = wall.axis == 0 ? dir.x() : dir.z();
    if (std::abs(denom) < kEps) continue;
    const double offset =
        wall.plane - (wall.axis == 0 ? origin.x() : origin.z());
    const double t = offset / denom;
    if (t <= kEps || (best > 0.0 && t >= best)) continue;
    const Eigen::Vector3d hit = origin + t * dir;
    const double along = wall.axis == 0 ? hit.z() : hit.x();
    if (along < wall.lo - kEdge || along > wall.hi + kEdge) continue;
    if (hit.y() < scene.floor_y - kEdge || hit.y() > scene.ceiling_y + kEdge) {
      continue;
    }
    best = t;
  }
  for (const double plane_y : {scene.floor_y, scene.ceiling_y}) {
    if (std::abs(dir.y()) < kEps) continue;
    const double t = (plane_y - origin.y()) / dir.y();
    if (t > kEps && (best < 0.0 || t < best)) best = t;
  }
  return best;
}

}  // namespace detail

/// Per-pixel distance along the optical axis to the nearest surface. The ray
/// for pixel (ix, iy) passes through its centered coordinates relative to the
/// principal point; depths are exact plane intersections, no sampling noise.
inline Raster render_depth(const ScenePlan& scene, const CameraPose& pose,
                           const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  const double f = intrinsics.focal_length;
  const double rho = intrinsics.pixel_pitch;
  const Eigen::Matrix3d rot = pose.rotation();
  Raster depth(intrinsics.width, intrinsics.height, 1);
  for (std::uint32_t iy = 0; iy < intrinsics.height; ++iy) {
    for (std::uint32_t ix = 0; ix < intrinsics.width; ++ix) {
      const double u = ix - intrinsics.cx;
      const double v = iy - intrinsics.cy;
      // unit forward component, so the ray parameter is the z-depth
      const Eigen::Vector3d dir_cam(rho * u / f, rho * v / f, 1.0);
      const double t = detail::raycast(scene, pose.position, rot * dir_cam);
      if (t <= 0.0) {
        throw OpenWorld("ray escaped the scene at pixel (" +
                        std::to_string(ix) + ", " + std::to_string(iy) + ")");
      }
      depth.at(ix, iy) = static_cast<float>(t);
    }
  }
  return depth;
}

/// Linear-model flow: the interaction matrix applied at every pixel of the
/// depth raster. Exact for infinitesimal motion.
inline Raster instantaneous_flow(const MotionVector& motion,
                                 const Raster& depth,
                                 const CameraIntrinsics& intrinsics) {
  if (depth.channels() != 1 || depth.width() != intrinsics.width ||
      depth.height() != intrinsics.height) {
    throw DimensionMismatch("depth raster does not match intrinsics");
  }
  const Eigen::Matrix<double, 6, 1> m = motion.to_vector();
  Raster flow(depth.width(), depth.height(), 2);
  for (std::uint32_t iy = 0; iy < depth.height(); ++iy) {
    for (std::uint32_t ix = 0; ix < depth.width(); ++ix) {
      const camera_motion::PixelSample sample{
          ix - intrinsics.cx, iy - intrinsics.cy, depth.at(ix, iy)};
      const Eigen::Vector2d uv =
          camera_motion::interaction_rows(sample, intrinsics) * m;
      flow.at(ix, iy, 0) = static_cast<float>(uv[0]);
      flow.at(ix, iy, 1) = static_cast<float>(uv[1]);
    }
  }
  return flow;
}

/// Exact two-view flow from a known depth raster at the first pose:
/// back-project, move into the second camera, re-project.
inline Raster reprojection_flow_from_depth(const Raster& depth,
                                           const CameraPose& pose_t,
                                           const CameraPose& pose_t1,
                                           const CameraIntrinsics& intrinsics) {
  if (depth.channels() != 1 || depth.width() != intrinsics.width ||
      depth.height() != intrinsics.height) {
    throw DimensionMismatch("depth raster does not match intrinsics");
  }
  const double f = intrinsics.focal_length;
  const double rho = intrinsics.pixel_pitch;
  const Eigen::Matrix3d rot_t = pose_t.rotation();
  const Eigen::Matrix3d rot_t1_inv = pose_t1.rotation().transpose();
  Raster flow(depth.width(), depth.height(), 2);
  for (std::uint32_t iy = 0; iy < depth.height(); ++iy) {
    for (std::uint32_t ix = 0; ix < depth.width(); ++ix) {
      const double u = ix - intrinsics.cx;
      const double v = iy - intrinsics.cy;
      const double z = depth.at(ix, iy);
      const Eigen::Vector3d point_cam(rho * u / f * z, rho * v / f * z, z);
      const Eigen::Vector3d point_world = rot_t * point_cam + pose_t.position;
      const Eigen::Vector3d point_cam1 =
          rot_t1_inv * (point_world - pose_t1.position);
      if (!(point_cam1.z() > 0.0)) {
        throw BehindCamera("point behind the second camera at pixel (" +
                           std::to_string(ix) + ", " + std::to_string(iy) +
                           ")");
      }
      const double u1 = f * point_cam1.x() / (rho * point_cam1.z());
      const double v1 = f * point_cam1.y() / (rho * point_cam1.z());
      flow.at(ix, iy, 0) = static_cast<float>(u1 - u);
      flow.at(ix, iy, 1) = static_cast<float>(v1 - v);
    }
  }
  return flow;
}

inline Raster reprojection_flow(const ScenePlan& scene, const CameraPose& pose_t,
                                const CameraPose& pose_t1,
                                const CameraIntrinsics& intrinsics) {
  return reprojection_flow_from_depth(render_depth(scene, pose_t, intrinsics),
                                      pose_t, pose_t1, intrinsics);
}

/// First-order screw motion between consecutive poses, expressed in the
/// camera frame at the earlier pose and using the sign conventions of
/// MotionVector (omega_y positive toward the left).
inline MotionVector motion_between(const CameraPose& pose_t,
                                   const CameraPose& pose_t1) {
  const Eigen::Matrix3d rot_t = pose_t.rotation();
  const Eigen::Vector3d translation_cam =
      rot_t.transpose() * (pose_t1.position - pose_t.position);
  const Eigen::Matrix3d rot_rel = rot_t.transpose() * pose_t1.rotation();
  const Eigen::AngleAxisd aa(rot_rel);
  const Eigen::Vector3d omega_cam = aa.angle() * aa.axis();
  return {translation_cam.x(), translation_cam.y(), translation_cam.z(),
          omega_cam.x(),       -omega_cam.y(),      omega_cam.z()};
}

inline double relative_rotation_angle(const CameraPose& pose_t,
                                      const CameraPose& pose_t1) {
  const Eigen::AngleAxisd aa(pose_t.rotation().transpose() *
                             pose_t1.rotation());
  return std::abs(aa.angle());
}

/// Everything a pipeline test needs for one synthetic walk: per-transition
/// depth and flow rasters, the exact camera motion, and its yaw series.
struct EpisodeBundle {
  std::vector<Raster> depth;
  std::vector<Raster> flow;
  std::vector<MotionVector> motion;
  heading_labeler::YawSeries yaw;
};

inline void validate_trajectory(const Trajectory& trajectory) {
  if (trajectory.poses.size() < 2) {
    throw InvariantViolation("trajectory needs at least 2 poses");
  }
  if (!(trajectory.fps > 0.0)) {
    throw InvariantViolation("trajectory fps must be positive");
  }
  constexpr double kMaxPerFrame = 10.0 * std::numbers::pi / 180.0;
  for (std::size_t i = 0; i + 1 < trajectory.poses.size(); ++i) {
    if (relative_rotation_angle(trajectory.poses[i], trajectory.poses[i + 1]) >=
        kMaxPerFrame) {
      throw InvariantViolation("per-frame rotation reaches 10 degrees at frame " +
                               std::to_string(i));
    }
  }
}

/// Renders one frame transition per consecutive pose pair. Depth is rendered
/// at the earlier pose, flow is the exact reprojection between the two, and
/// the ground-truth motion comes from the pose delta.
inline EpisodeBundle synthesize_episode(const ScenePlan& scene,
                                        const Trajectory& trajectory,
                                        const CameraIntrinsics& intrinsics) {
  validate_trajectory(trajectory);
  EpisodeBundle bundle;
  bundle.yaw.fps = trajectory.fps;
  const std::size_t transitions = trajectory.poses.size() - 1;
  bundle.depth.reserve(transitions);
  bundle.flow.reserve(transitions);
  bundle.motion.reserve(transitions);
  for (std::size_t t = 0; t < transitions; ++t) {
    const CameraPose& pose = trajectory.poses[t];
    const CameraPose& next = trajectory.poses[t + 1];
    Raster depth = render_depth(scene, pose, intrinsics);
    bundle.flow.push_back(
        reprojection_flow_from_depth(depth, pose, next, intrinsics));
    bundle.depth.push_back(std::move(depth));
    bundle.motion.push_back(motion_between(pose, next));
    bundle.yaw.values.push_back(bundle.motion.back().omega_y);
  }
  return bundle;
}

/// Walks a polyline of waypoints at constant speed, rotating in place at each
/// corner. Turns are spread over ceil(|angle| / turn_rate) frames so the
/// per-frame rotation never exceeds `turn_rate`.
inline Trajectory walk_waypoints(const std::vector<Eigen::Vector2d>& waypoints,
                                 double eye_height, double speed_per_frame,
                                 double turn_rate_per_frame, double fps = 30.0) {
  if (waypoints.size() < 2) {
    throw InvariantViolation("need at least 2 waypoints");
  }
  Trajectory trajectory;
  trajectory.fps = fps;
  auto yaw_toward = [](const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
    const Eigen::Vector2d d = (to - from).normalized();
    // forward(yaw) = (cos yaw, -sin yaw) in the (x, z) plane
    return std::atan2(-d.y(), d.x());
  };

  Eigen::Vector2d at = waypoints[0];
  double yaw = yaw_toward(waypoints[0], waypoints[1]);
  auto emit = [&]() {
    trajectory.poses.push_back(
        {Eigen::Vector3d(at.x(), eye_height, at.y()), yaw, 0.0, 0.0});
  };
  emit();
  for (std::size_t leg = 0; leg + 1 < waypoints.size(); ++leg) {
    const Eigen::Vector2d target = waypoints[leg + 1];
    const double want = yaw_toward(at, target);
    double delta = std::remainder(want - yaw, 2.0 * std::numbers::pi);
    if (std::abs(delta) > 1e-12) {
      const int steps =
          static_cast<int>(std::ceil(std::abs(delta) / turn_rate_per_frame));
      for (int i = 0; i < steps; ++i) {
        yaw += delta / steps;
        emit();
      }
    }
    double remaining = (target - at).norm();
    while (remaining > 1e-9) {
      const double step = std::min(speed_per_frame, remaining);
      at += (target - at).normalized() * step;
      remaining -= step;
      emit();
    }
  }
  return trajectory;
}

}  // namespace navkit::sim_world
