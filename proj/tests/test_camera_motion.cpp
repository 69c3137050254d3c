#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "navkit/camera_motion.hpp"

using namespace navkit;
using namespace navkit::camera_motion;

namespace {

CameraIntrinsics unit_intrinsics() {
  CameraIntrinsics intrinsics;
  intrinsics.focal_length = 1.0;
  intrinsics.pixel_pitch = 1.0;
  intrinsics.cx = 0.0;
  intrinsics.cy = 0.0;
  intrinsics.width = 1;
  intrinsics.height = 1;
  return intrinsics;
}

}  // namespace

TEST_CASE("interaction rows at the principal point") {
  const PixelSample sample{0.0, 0.0, 1.0};
  const InteractionRows rows = interaction_rows(sample, unit_intrinsics());
  const double expected[2][6] = {{-1, 0, 0, 0, 1, 0}, {0, -1, 0, 1, 0, 0}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 6; ++c) {
      CHECK(rows(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-15));
    }
  }
}

TEST_CASE("interaction rows off center") {
  const PixelSample sample{1.0, 0.0, 2.0};
  const InteractionRows rows = interaction_rows(sample, unit_intrinsics());
  const double expected[2][6] = {{-0.5, 0, 0.5, 0, 2, 0}, {0, -0.5, 0, 1, 0, -1}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 6; ++c) {
      CHECK(rows(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-15));
    }
  }
}

TEST_CASE("translational columns vanish at large depth, rotational stay") {
  const PixelSample near{3.0, -2.0, 1.0};
  const PixelSample far{3.0, -2.0, 1e12};
  const InteractionRows rows_near = interaction_rows(near, unit_intrinsics());
  const InteractionRows rows_far = interaction_rows(far, unit_intrinsics());
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(rows_far(r, c)) < 1e-11);
    }
    for (int c = 3; c < 6; ++c) {
      CHECK(rows_far(r, c) == rows_near(r, c));
    }
  }
}

TEST_CASE("interaction rows rejects non-positive depth") {
  CHECK_THROWS_AS(interaction_rows({0.0, 0.0, 0.0}, unit_intrinsics()),
                  NonPositiveDepth);
  CHECK_THROWS_AS(interaction_rows({0.0, 0.0, -2.0}, unit_intrinsics()),
                  NonPositiveDepth);
}

TEST_CASE("project_flow basics") {
  SUBCASE("zero motion gives zero flow") {
    Rng rng(7);
    const CameraIntrinsics intrinsics = testutil::make_intrinsics();
    const auto samples = testutil::random_samples(rng, intrinsics, 32);
    for (const PixelFlow& flow : project_flow({}, samples, intrinsics)) {
      CHECK(flow.u_dot == 0.0);
      CHECK(flow.v_dot == 0.0);
    }
  }

  SUBCASE("pure yaw at the principal point flows horizontally") {
    MotionVector motion;
    motion.omega_y = 0.1;
    const PixelSample center{0.0, 0.0, 1.0};
    const auto flows = project_flow(motion, {{center}}, unit_intrinsics());
    CHECK(flows[0].u_dot == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(flows[0].v_dot == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("pure forward motion expands radially") {
    MotionVector motion;
    motion.v_z = 0.2;
    const PixelSample sample{4.0, -4.0, 2.0};
    const auto flows = project_flow(motion, {{sample}}, unit_intrinsics());
    CHECK(flows[0].u_dot == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(flows[0].v_dot == doctest::Approx(-0.4).epsilon(1e-15));
  }
}

TEST_CASE("project_flow is linear in the motion") {
  Rng rng(11);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  const auto samples = testutil::random_samples(rng, intrinsics, 64);
  for (int trial = 0; trial < 20; ++trial) {
    const MotionVector m1 = testutil::random_motion(rng, 0.1);
    const MotionVector m2 = testutil::random_motion(rng, 0.1);
    const double alpha = rng.uniform(-2.0, 2.0);
    const double beta = rng.uniform(-2.0, 2.0);
    const MotionVector combo = MotionVector::from_vector(
        alpha * m1.to_vector() + beta * m2.to_vector());

    const auto flow_combo = project_flow(combo, samples, intrinsics);
    const auto flow_1 = project_flow(m1, samples, intrinsics);
    const auto flow_2 = project_flow(m2, samples, intrinsics);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(flow_combo[i].u_dot ==
            doctest::Approx(alpha * flow_1[i].u_dot + beta * flow_2[i].u_dot)
                .epsilon(1e-12));
      CHECK(flow_combo[i].v_dot ==
            doctest::Approx(alpha * flow_1[i].v_dot + beta * flow_2[i].v_dot)
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate_motion round trip recovers the generating motion") {
  Rng rng(23);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  for (int trial = 0; trial < 50; ++trial) {
    const MotionVector truth = testutil::random_motion(rng, 0.1);
    auto samples = testutil::random_samples(rng, intrinsics, 200);
    testutil::attach_flow(samples, project_flow(truth, samples, intrinsics));

    const EstimationResult result = estimate_motion(samples, intrinsics);
    CHECK(testutil::motion_distance(result.motion, truth) <
          1e-9 * testutil::motion_norm(truth));
    CHECK(result.rms_residual < 1e-10);
  }
}

TEST_CASE("estimate_motion round trip holds with few generic samples") {
  Rng rng(29);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  for (int trial = 0; trial < 20; ++trial) {
    const MotionVector truth = testutil::random_motion(rng, 0.1);
    auto samples = testutil::random_samples(rng, intrinsics, 6);
    testutil::attach_flow(samples, project_flow(truth, samples, intrinsics));
    const EstimationResult result = estimate_motion(samples, intrinsics);
    CHECK(testutil::motion_distance(result.motion, truth) <
          1e-9 * testutil::motion_norm(truth));
  }
}

TEST_CASE("estimate_motion matches an independent normal-equations solve") {
  Rng rng(31);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  for (int trial = 0; trial < 20; ++trial) {
    auto samples = testutil::random_samples(rng, intrinsics, 100);
    // noisy flows so the residual is nonzero and the minimizer nontrivial
    const MotionVector truth = testutil::random_motion(rng, 0.05);
    auto flows = project_flow(truth, samples, intrinsics);
    for (auto& flow : flows) {
      flow.u_dot += rng.normal(0.0, 0.5);
      flow.v_dot += rng.normal(0.0, 0.5);
    }
    testutil::attach_flow(samples, flows);

    const MotionVector via_svd = estimate_motion(samples, intrinsics).motion;
    const MotionVector via_normal =
        testutil::solve_normal_equations(samples, intrinsics);
    CHECK(testutil::motion_distance(via_svd, via_normal) <
          1e-8 * std::max(1.0, testutil::motion_norm(via_svd)));
  }
}

TEST_CASE("estimate_motion is invariant under sample permutations") {
  Rng rng(37);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  auto samples = testutil::random_samples(rng, intrinsics, 50);
  const MotionVector truth = testutil::random_motion(rng, 0.1);
  auto flows = project_flow(truth, samples, intrinsics);
  for (auto& flow : flows) {
    flow.u_dot += rng.normal(0.0, 0.3);
    flow.v_dot += rng.normal(0.0, 0.3);
  }
  testutil::attach_flow(samples, flows);
  const MotionVector reference = estimate_motion(samples, intrinsics).motion;

  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = samples.size(); i > 1; --i) {
      std::swap(samples[i - 1], samples[rng.uniform_index(i)]);
    }
    const MotionVector shuffled = estimate_motion(samples, intrinsics).motion;
    CHECK(testutil::motion_distance(shuffled, reference) <
          1e-9 * std::max(1.0, testutil::motion_norm(reference)));
  }
}

TEST_CASE("estimate_motion error paths") {
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();

  SUBCASE("zero flow maps to the zero motion") {
    Rng rng(41);
    auto samples = testutil::random_samples(rng, intrinsics, 40);
    const EstimationResult result = estimate_motion(samples, intrinsics);
    CHECK(testutil::motion_norm(result.motion) == 0.0);
  }

  SUBCASE("fewer than 3 samples") {
    const std::vector<PixelSample> samples = {{0, 0, 1}, {10, 5, 2}};
    CHECK_THROWS_AS(estimate_motion(samples, intrinsics), InsufficientSamples);
  }

  SUBCASE("all samples at one pixel are rank deficient") {
    const std::vector<PixelSample> samples(10, PixelSample{5.0, -3.0, 2.0});
    CHECK_THROWS_AS(estimate_motion(samples, intrinsics), RankDeficient);
  }

  SUBCASE("non-positive depth is rejected") {
    const std::vector<PixelSample> samples = {{0, 0, 1}, {1, 1, -1}, {2, 2, 1}};
    CHECK_THROWS_AS(estimate_motion(samples, intrinsics), NonPositiveDepth);
  }
}

TEST_CASE("sample_pixels draws distinct valid pixels deterministically") {
  const CameraIntrinsics intrinsics = testutil::make_intrinsics(128, 128, 128.0);
  Raster flow(128, 128, 2);
  Raster depth(128, 128, 1, 4.0f);
  // encode the pixel coordinates in the flow so samples are identifiable
  for (std::uint32_t y = 0; y < 128; ++y) {
    for (std::uint32_t x = 0; x < 128; ++x) {
      flow.at(x, y, 0) = static_cast<float>(x);
      flow.at(x, y, 1) = static_cast<float>(y);
    }
  }

  EstimationConfig config;
  config.sample_count = 200;
  config.rng_seed = 99;
  const auto samples = sample_pixels(flow, depth, intrinsics, config);
  CHECK(samples.size() == 200);

  std::set<std::pair<int, int>> distinct;
  for (const PixelSample& sample : samples) {
    const int x = static_cast<int>(std::lround(sample.flow_u));
    const int y = static_cast<int>(std::lround(sample.flow_v));
    distinct.emplace(x, y);
    CHECK(sample.u == doctest::Approx(x - intrinsics.cx));
    CHECK(sample.v == doctest::Approx(y - intrinsics.cy));
    CHECK(sample.depth == doctest::Approx(4.0));
  }
  CHECK(distinct.size() == 200);

  const auto again = sample_pixels(flow, depth, intrinsics, config);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].u == again[i].u);
    CHECK(samples[i].v == again[i].v);
  }

  config.rng_seed = 100;
  const auto other_seed = sample_pixels(flow, depth, intrinsics, config);
  bool any_difference = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].u != other_seed[i].u || samples[i].v != other_seed[i].v) {
      any_difference = true;
      break;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("sample_pixels needs enough valid pixels") {
  const CameraIntrinsics intrinsics = testutil::make_intrinsics(128, 128, 128.0);
  Raster flow(128, 128, 2);
  Raster depth(128, 128, 1, -1.0f);  // everything invalid
  // exactly 150 pixels valid
  int made_valid = 0;
  for (std::uint32_t y = 0; y < 128 && made_valid < 150; ++y) {
    for (std::uint32_t x = 0; x < 128 && made_valid < 150; ++x) {
      depth.at(x, y) = 3.0f;
      ++made_valid;
    }
  }
  EstimationConfig config;
  config.sample_count = 200;
  CHECK_THROWS_AS(sample_pixels(flow, depth, intrinsics, config),
                  NotEnoughValidPixels);

  config.sample_count = 150;
  CHECK(sample_pixels(flow, depth, intrinsics, config).size() == 150);
}

TEST_CASE("sample_pixels skips NaN depth and NaN flow") {
  const CameraIntrinsics intrinsics = testutil::make_intrinsics(16, 16, 16.0);
  Raster flow(16, 16, 2);
  Raster depth(16, 16, 1, 2.0f);
  depth.at(3, 3) = std::numeric_limits<float>::quiet_NaN();
  flow.at(5, 5, 0) = std::numeric_limits<float>::infinity();
  EstimationConfig config;
  config.sample_count = 16 * 16 - 2;
  const auto samples = sample_pixels(flow, depth, intrinsics, config);
  for (const PixelSample& sample : samples) {
    CHECK(std::isfinite(sample.depth));
    CHECK(std::isfinite(sample.flow_u));
  }
}

TEST_CASE("extract_yaw projects the yaw component") {
  CHECK(extract_yaw({0, 0, 0, 0, 0.05, 0}) == 0.05);
  CHECK(extract_yaw({}) == 0.0);
}

TEST_CASE("noise robustness sanity at 200 samples") {
  // The acceptance suite runs the full 1000-trial comparison; this is a
  // smaller smoke version of the same experiment.
  Rng rng(53);
  const CameraIntrinsics intrinsics = testutil::make_intrinsics();
  MotionVector truth;
  truth.omega_y = 0.02;

  double total_error = 0.0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    auto samples = testutil::random_samples(rng, intrinsics, 200);
    auto flows = project_flow(truth, samples, intrinsics);
    for (auto& flow : flows) {
      flow.u_dot += rng.normal(0.0, 0.5);
      flow.v_dot += rng.normal(0.0, 0.5);
    }
    testutil::attach_flow(samples, flows);
    total_error += std::abs(extract_yaw(estimate_motion(samples, intrinsics).motion) -
                            truth.omega_y);
  }
  CHECK(total_error / trials < 0.1 * truth.omega_y);
}
