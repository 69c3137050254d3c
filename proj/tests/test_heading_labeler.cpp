#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "navkit/heading_labeler.hpp"

using namespace navkit;
using namespace navkit::heading_labeler;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

YawSeries series_of(std::vector<double> values, double fps = 30.0) {
  return {std::move(values), fps};
}

/// Smooth left-turn bump integrating to `total` radians, with flat padding.
YawSeries turn_bump(int total_frames, int turn_start, int turn_frames,
                    double total) {
  YawSeries series = series_of(std::vector<double>(total_frames, 0.0));
  double sum = 0.0;
  std::vector<double> shape(turn_frames);
  for (int i = 0; i < turn_frames; ++i) {
    shape[i] = 1.0 - std::cos(2.0 * kPi * (i + 0.5) / turn_frames);
    sum += shape[i];
  }
  for (int i = 0; i < turn_frames; ++i) {
    series.values[turn_start + i] = total * shape[i] / sum;
  }
  return series;
}

}  // namespace

TEST_CASE("smooth leaves a constant series unchanged") {
  const YawSeries series = series_of(std::vector<double>(40, 0.37));
  const YawSeries smoothed = smooth(series, 15);
  CHECK(smoothed.values.size() == 40);
  for (double value : smoothed.values) {
    CHECK(value == doctest::Approx(0.37).epsilon(1e-14));
  }
}

TEST_CASE("smooth with window 1 is the identity") {
  Rng rng(3);
  std::vector<double> values(25);
  for (double& value : values) value = rng.uniform(-1.0, 1.0);
  const YawSeries series = series_of(values);
  const YawSeries smoothed = smooth(series, 1);
  CHECK(smoothed.values == series.values);
}

TEST_CASE("smooth spreads a unit impulse over the window") {
  std::vector<double> values(20, 0.0);
  values[10] = 1.0;
  const YawSeries smoothed = smooth(series_of(values), 5);
  for (int t = 0; t < 20; ++t) {
    if (t >= 8 && t <= 12) {
      CHECK(smoothed.values[t] == doctest::Approx(0.2).epsilon(1e-14));
    } else {
      CHECK(smoothed.values[t] == 0.0);
    }
  }
}

TEST_CASE("smooth boundary windows shrink symmetrically") {
  std::vector<double> values(6, 0.0);
  values[0] = 1.0;
  const YawSeries smoothed = smooth(series_of(values), 5);
  CHECK(smoothed.values[0] == doctest::Approx(1.0));        // window shrank to 1
  CHECK(smoothed.values[1] == doctest::Approx(1.0 / 3.0));  // frames 0..2
  CHECK(smoothed.values[2] == doctest::Approx(0.2));        // frames 0..4
}

TEST_CASE("smooth validates its inputs") {
  CHECK_THROWS_AS(smooth(series_of({}), 5), EmptySeries);
  CHECK_THROWS_AS(smooth(series_of({1.0}), 4), InvariantViolation);
  CHECK_THROWS_AS(smooth(series_of({1.0}), -1), InvariantViolation);
}

TEST_CASE("integrate_heading") {
  SUBCASE("zeros integrate to zeros") {
    const auto heading = integrate_heading(series_of(std::vector<double>(10, 0.0)));
    for (double value : heading) CHECK(value == 0.0);
  }
  SUBCASE("constant rate accumulates linearly") {
    const auto heading =
        integrate_heading(series_of(std::vector<double>(100, 0.01)));
    CHECK(heading[0] == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(heading[99] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("empty series is rejected") {
    CHECK_THROWS_AS(integrate_heading(series_of({})), EmptySeries);
  }
}

TEST_CASE("class_for_angle partitions the circle") {
  CHECK(class_for_angle(0.0).index == 0);
  CHECK(class_for_angle(45.0 * kDeg).index == 1);
  CHECK(class_for_angle(90.0 * kDeg).index == 2);
  CHECK(class_for_angle(180.0 * kDeg).index == 4);
  CHECK(class_for_angle(-180.0 * kDeg).index == 4);  // wraps to +180
  CHECK(class_for_angle(-90.0 * kDeg).index == 6);
  CHECK(class_for_angle(-45.0 * kDeg).index == 7);
  CHECK(class_for_angle(315.0 * kDeg).index == 7);  // wraps to -45

  SUBCASE("centers recover their own class") {
    for (int cls = 0; cls < kDirectionClasses; ++cls) {
      CHECK(class_for_angle(45.0 * cls * kDeg).index == cls);
    }
  }

  SUBCASE("boundaries belong to the counter-clockwise class") {
    CHECK(class_for_angle(22.5 * kDeg).index == 1);
    CHECK(class_for_angle(67.5 * kDeg).index == 2);
    CHECK(class_for_angle(157.5 * kDeg).index == 4);
    CHECK(class_for_angle(-22.5 * kDeg).index == 0);
    CHECK(class_for_angle(-157.5 * kDeg).index == 5);
  }

  SUBCASE("dense sweep maps every angle to exactly one valid class") {
    for (int step = -7200; step <= 7200; ++step) {
      const double angle = step * 0.1 * kDeg;
      const DirectionClass label = class_for_angle(angle);
      CHECK(label.index < kDirectionClasses);
    }
  }
}

TEST_CASE("label_frames on an all-zero series is all forward") {
  const YawSeries series = series_of(std::vector<double>(50, 0.0));
  const DirectionLabelSeries labels = label_frames(series, LabelConfig{});
  CHECK(labels.labels.size() == 50);
  for (const DirectionClass& label : labels.labels) CHECK(label.index == 0);
}

TEST_CASE("heading change of +90 degrees over the lookahead labels class 2") {
  LabelConfig config;
  config.lookahead_frames = 10;
  std::vector<double> values(40, 0.0);
  for (int t = 10; t < 20; ++t) values[t] = (90.0 / 10.0) * kDeg;
  const DirectionLabelSeries labels = label_frames(series_of(values), config);
  // at frame 9 the next 10 frames carry the whole +90 degree turn
  CHECK(labels.labels[9].index == 2);
  CHECK(labels.labels[0].index == 0);
  CHECK(labels.labels[35].index == 0);
}

TEST_CASE("rate-threshold mode bins the scaled instantaneous rate") {
  LabelConfig config;
  config.mode = LabelMode::rate_threshold;
  config.lookahead_frames = 20;
  config.smoothing_window = 5;
  const YawSeries series =
      series_of(std::vector<double>(30, (90.0 / 20.0) * kDeg));
  const DirectionLabelSeries labels = label_frames(series, config);
  for (const DirectionClass& label : labels.labels) CHECK(label.index == 2);
}

TEST_CASE("label_frames is shift-equivariant") {
  Rng rng(17);
  LabelConfig config;
  config.lookahead_frames = 12;
  std::vector<double> values(60);
  for (double& value : values) value = rng.uniform(-0.05, 0.05);
  const DirectionLabelSeries base = label_frames(series_of(values), config);

  const std::size_t shift = 9;
  std::vector<double> shifted(shift, 0.0);
  shifted.insert(shifted.end(), values.begin(), values.end());
  const DirectionLabelSeries moved = label_frames(series_of(shifted), config);

  for (std::size_t t = 0; t < values.size(); ++t) {
    CHECK(moved.labels[t + shift] == base.labels[t]);
  }
}

TEST_CASE("positive scaling preserves the turn side") {
  Rng rng(19);
  LabelConfig config;
  config.lookahead_frames = 15;
  const auto side = [](const DirectionClass& label) {
    if (label.index >= 1 && label.index <= 3) return +1;
    if (label.index >= 5 && label.index <= 7) return -1;
    return 0;
  };
  for (int trial = 0; trial < 30; ++trial) {
    // keep scaled heading deltas below 180 degrees so nothing wraps
    std::vector<double> values(50);
    for (double& value : values) value = rng.uniform(-0.028, 0.028);
    const double scale = rng.uniform(0.25, 4.0);
    std::vector<double> scaled = values;
    for (double& value : scaled) value *= scale;

    const DirectionLabelSeries base = label_frames(series_of(values), config);
    const DirectionLabelSeries wide = label_frames(series_of(scaled), config);
    for (std::size_t t = 0; t < values.size(); ++t) {
      const int side_base = side(base.labels[t]);
      const int side_wide = side(wide.labels[t]);
      if (side_base != 0 && side_wide != 0) {
        CHECK(side_base == side_wide);
      }
    }
  }
}

TEST_CASE("class_weights") {
  SUBCASE("single class gives equal weights") {
    DirectionLabelSeries labels;
    labels.labels.assign(20, DirectionClass{0});
    const auto weights = class_weights(labels);
    for (double weight : weights) {
      CHECK(weight == doctest::Approx(20.0 / (8.0 * 20.0)));
    }
  }

  SUBCASE("rare class frames weigh more, 9:1 for a 90/10 split") {
    DirectionLabelSeries labels;
    labels.labels.assign(90, DirectionClass{0});
    labels.labels.insert(labels.labels.end(), 10, DirectionClass{2});
    const auto weights = class_weights(labels);
    CHECK(weights[0] == doctest::Approx(100.0 / (8.0 * 90.0)));
    CHECK(weights[95] == doctest::Approx(100.0 / (8.0 * 10.0)));
    CHECK(weights[95] / weights[0] == doctest::Approx(9.0));
  }

  SUBCASE("weights are positive and finite") {
    Rng rng(23);
    DirectionLabelSeries labels;
    for (int i = 0; i < 200; ++i) {
      labels.labels.push_back({static_cast<std::uint8_t>(rng.uniform_index(8))});
    }
    for (double weight : class_weights(labels)) {
      CHECK(weight > 0.0);
      CHECK(std::isfinite(weight));
    }
  }

  SUBCASE("each present class carries equal total mass") {
    Rng rng(29);
    DirectionLabelSeries labels;
    for (int i = 0; i < 300; ++i) {
      labels.labels.push_back({static_cast<std::uint8_t>(rng.uniform_index(5))});
    }
    const auto weights = class_weights(labels);
    double mass[8] = {};
    for (std::size_t t = 0; t < weights.size(); ++t) {
      mass[labels.labels[t].index] += weights[t];
    }
    double reference = -1.0;
    for (int cls = 0; cls < 8; ++cls) {
      if (mass[cls] == 0.0) continue;
      if (reference < 0.0) reference = mass[cls];
      CHECK(mass[cls] == doctest::Approx(reference).epsilon(1e-12));
    }
  }

  SUBCASE("empty labels are rejected") {
    CHECK_THROWS_AS(class_weights(DirectionLabelSeries{}), EmptySeries);
  }
}

TEST_CASE("reverse_series flips time and sign") {
  const YawSeries series = series_of({0.1, 0.2, -0.3});
  const YawSeries reversed = reverse_series(series);
  CHECK(reversed.values == std::vector<double>{0.3, -0.2, -0.1});
}

TEST_CASE("reverse_series is an involution") {
  Rng rng(31);
  std::vector<double> values(64);
  for (double& value : values) value = rng.uniform(-0.3, 0.3);
  const YawSeries series = series_of(values);
  const YawSeries twice = reverse_series(reverse_series(series));
  CHECK(twice.values == series.values);
}

TEST_CASE("reversed left turns label as mirrored right turns") {
  const int total_frames = 140;
  const int lookahead = 20;
  const YawSeries forward = turn_bump(total_frames, 50, 30, 90.0 * kDeg);
  const YawSeries backward = reverse_series(forward);

  LabelConfig config;
  config.lookahead_frames = lookahead;
  const DirectionLabelSeries labels_f = label_frames(forward, config);
  const DirectionLabelSeries labels_r = label_frames(backward, config);

  // Reversing maps the heading change at t onto frame T-2-lookahead-t with
  // its sign flipped, so labels mirror across left/right.
  int compared_nonforward = 0;
  for (int k = 0; k + lookahead <= total_frames - 1; ++k) {
    const int source = total_frames - 2 - lookahead - k;
    if (source < 0) break;
    CHECK(labels_r.labels[k] == mirror_class(labels_f.labels[source]));
    if (labels_f.labels[source].index != 0) ++compared_nonforward;
  }
  CHECK(compared_nonforward > 20);

  // the forward bump is a left turn, the reversed one a right turn
  bool saw_left = false, saw_right = false;
  for (const auto& label : labels_f.labels) {
    if (label.index >= 1 && label.index <= 3) saw_left = true;
  }
  for (const auto& label : labels_r.labels) {
    if (label.index >= 5 && label.index <= 7) saw_right = true;
  }
  CHECK(saw_left);
  CHECK(saw_right);
}

TEST_CASE("label config validation") {
  const YawSeries series = series_of({0.0, 0.0});
  LabelConfig config;
  config.smoothing_window = 4;
  CHECK_THROWS_AS(label_frames(series, config), InvariantViolation);
  config = LabelConfig{};
  config.lookahead_frames = 0;
  CHECK_THROWS_AS(label_frames(series, config), InvariantViolation);
  CHECK_THROWS_AS(label_frames(series_of({}), LabelConfig{}), EmptySeries);
  CHECK(LabelConfig::for_fps(30.0).lookahead_frames == 60);
}
