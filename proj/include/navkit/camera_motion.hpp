#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "navkit/errors.hpp"
#include "navkit/raster.hpp"
#include "navkit/rng.hpp"

namespace navkit::camera_motion {

/// Pinhole camera parameters. `focal_length` and `pixel_pitch` share the same
/// length unit, so focal_length / pixel_pitch is the focal length in pixels.
struct CameraIntrinsics {
  double focal_length = 1.0;  ///< f, in length units
  double pixel_pitch = 1.0;   ///< rho, length per pixel
  double cx = 0.0;            ///< principal point, raw pixel coordinates
  double cy = 0.0;
  std::uint32_t width = 0;   ///< image size in pixels
  std::uint32_t height = 0;

  void validate() const {
    if (!(focal_length > 0.0)) {
      throw InvariantViolation("focal_length must be positive");
    }
    if (!(pixel_pitch > 0.0)) {
      throw InvariantViolation("pixel_pitch must be positive");
    }
    if (cx < 0.0 || cx > width - 1.0 || cy < 0.0 || cy > height - 1.0) {
      throw InvariantViolation("principal point outside image bounds");
    }
  }
};

/// One pixel's contribution to the motion system: centered coordinates,
/// scene depth along the optical axis, and the observed optical flow.
struct PixelSample {
  double u = 0.0;  ///< horizontal coordinate relative to the principal point
  double v = 0.0;  ///< vertical coordinate relative to the principal point,
                   ///< positive downward
  double depth = 0.0;   ///< Z, length units, must be positive
  double flow_u = 0.0;  ///< pixels per frame
  double flow_v = 0.0;
};

struct PixelFlow {
  double u_dot = 0.0;
  double v_dot = 0.0;
};

/// Instantaneous camera motion per frame interval. Translation is expressed
/// in the camera frame (x right, y down, z forward, length units per frame).
/// Rotation is in radians per frame; omega_y is positive for a rotation
/// toward the left and negative toward the right.
struct MotionVector {
  double v_x = 0.0;
  double v_y = 0.0;
  double v_z = 0.0;
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;

  Eigen::Matrix<double, 6, 1> to_vector() const {
    Eigen::Matrix<double, 6, 1> m;
    m << v_x, v_y, v_z, omega_x, omega_y, omega_z;
    return m;
  }

  static MotionVector from_vector(const Eigen::Matrix<double, 6, 1>& m) {
    return {m[0], m[1], m[2], m[3], m[4], m[5]};
  }
};

struct EstimationConfig {
  int sample_count = 200;
  std::uint64_t rng_seed = 0;
  bool residual_report = false;

  void validate() const {
    if (sample_count < 3) {
      throw InvariantViolation("sample_count must be at least 3");
    }
  }
};

struct EstimationResult {
  MotionVector motion;
  double rms_residual = 0.0;
};

using InteractionRows = Eigen::Matrix<double, 2, 6>;

/// The 2x6 interaction matrix tying this pixel's image velocity to the six
/// camera motion components. Rows are (u_dot, v_dot); columns are
/// (v_x, v_y, v_z, omega_x, omega_y, omega_z).
inline InteractionRows interaction_rows(const PixelSample& sample,
                                        const CameraIntrinsics& intrinsics) {
  if (!(sample.depth > 0.0)) {
    throw NonPositiveDepth("sample depth must be positive, got " +
                           std::to_string(sample.depth));
  }
  const double f = intrinsics.focal_length;
  const double rho = intrinsics.pixel_pitch;
  const double u = sample.u;
  const double v = sample.v;
  const double z = sample.depth;

  InteractionRows rows;
  rows(0, 0) = -f / (rho * z);
  rows(0, 1) = 0.0;
  rows(0, 2) = u / z;
  rows(0, 3) = rho * u * v / f;
  rows(0, 4) = (f * f + rho * rho * u * u) / (rho * f);
  rows(0, 5) = v;
  rows(1, 0) = 0.0;
  rows(1, 1) = -f / (rho * z);
  rows(1, 2) = v / z;
  rows(1, 3) = (f * f + rho * rho * v * v) / (rho * f);
  rows(1, 4) = rho * u * v / f;
  rows(1, 5) = -u;
  return rows;
}

/// Forward model: the flow each sample would observe under `motion`.
inline std::vector<PixelFlow> project_flow(const MotionVector& motion,
                                           std::span<const PixelSample> samples,
                                           const CameraIntrinsics& intrinsics) {
  const Eigen::Matrix<double, 6, 1> m = motion.to_vector();
  std::vector<PixelFlow> flows;
  flows.reserve(samples.size());
  for (const PixelSample& sample : samples) {
    const Eigen::Vector2d uv = interaction_rows(sample, intrinsics) * m;
    flows.push_back({uv[0], uv[1]});
  }
  return flows;
}

/// Least-squares recovery of the camera motion from observed flow and depth.
/// Minimizes the stacked residual over all samples; solved through an SVD
/// rather than the normal equations, which gives the same minimizer with
/// better conditioning. Throws RankDeficient when the stacked matrix has
/// numerical rank below 6 (singular value ratio under 1e-10).
inline EstimationResult estimate_motion(std::span<const PixelSample> samples,
                                        const CameraIntrinsics& intrinsics,
                                        const EstimationConfig& config = {}) {
  (void)config;
  if (samples.size() < 3) {
    throw InsufficientSamples("need at least 3 samples, got " +
                              std::to_string(samples.size()));
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(2 * samples.size());
  Eigen::MatrixXd a(rows, 6);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    a.block<2, 6>(2 * static_cast<Eigen::Index>(i), 0) =
        interaction_rows(samples[i], intrinsics);
    b[2 * i] = samples[i].flow_u;
    b[2 * i + 1] = samples[i].flow_v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[5] / sv[0] < 1e-10) {
    throw RankDeficient("stacked interaction matrix is rank deficient "
                        "(singular value ratio below 1e-10)");
  }
  const Eigen::Matrix<double, 6, 1> x = svd.solve(b);
  const double rms = (a * x - b).norm() / std::sqrt(static_cast<double>(rows));
  return {MotionVector::from_vector(x), rms};
}

/// Draws `config.sample_count` distinct pixels, uniformly among those with
/// positive finite depth and finite flow, and centers their coordinates on
/// the principal point. Deterministic for a fixed seed.
inline std::vector<PixelSample> sample_pixels(const Raster& flow,
                                              const Raster& depth,
                                              const CameraIntrinsics& intrinsics,
                                              const EstimationConfig& config) {
  config.validate();
  intrinsics.validate();
  if (flow.channels() != 2 || depth.channels() != 1) {
    throw DimensionMismatch("expected a 2-channel flow and 1-channel depth raster");
  }
  if (flow.width() != depth.width() || flow.height() != depth.height() ||
      flow.width() != intrinsics.width || flow.height() != intrinsics.height) {
    throw DimensionMismatch("flow, depth and intrinsics image sizes disagree");
  }

  std::vector<std::uint64_t> valid;
  valid.reserve(static_cast<std::size_t>(flow.width()) * flow.height());
  for (std::uint32_t y = 0; y < flow.height(); ++y) {
    for (std::uint32_t x = 0; x < flow.width(); ++x) {
      const float z = depth.at(x, y);
      if (!(z > 0.0f) || !std::isfinite(z)) continue;
      if (!std::isfinite(flow.at(x, y, 0)) || !std::isfinite(flow.at(x, y, 1))) {
        continue;
      }
      valid.push_back(static_cast<std::uint64_t>(y) * flow.width() + x);
    }
  }
  const std::size_t want = static_cast<std::size_t>(config.sample_count);
  if (valid.size() < want) {
    throw NotEnoughValidPixels(std::to_string(valid.size()) +
                               " valid pixels, need " + std::to_string(want));
  }

  // Partial Fisher-Yates over the valid index list.
  Rng rng(config.rng_seed);
  std::vector<PixelSample> samples;
  samples.reserve(want);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + rng.uniform_index(valid.size() - i);
    std::swap(valid[i], valid[j]);
    const std::uint32_t x = static_cast<std::uint32_t>(valid[i] % flow.width());
    const std::uint32_t y = static_cast<std::uint32_t>(valid[i] / flow.width());
    samples.push_back({x - intrinsics.cx, y - intrinsics.cy, depth.at(x, y),
                       flow.at(x, y, 0), flow.at(x, y, 1)});
  }
  return samples;
}

/// The yaw rate, radians per frame, positive toward the left.
inline double extract_yaw(const MotionVector& motion) { return motion.omega_y; }

}  // namespace navkit::camera_motion
