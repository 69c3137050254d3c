#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "navkit/errors.hpp"

namespace navkit::heading_labeler {

/// Per-frame yaw rate signal, radians per frame transition, positive toward
/// the left.
struct YawSeries {
  std::vector<double> values;
  double fps = 30.0;
};

/// One of 8 walking directions at 45 degree spacing, counter-clockwise
/// (leftward) from forward. Class 0 is forward, class 4 is backward;
/// classes 3..5 form the backward sector.
struct DirectionClass {
  std::uint8_t index = 0;

  double center_degrees() const { return 45.0 * index; }
  bool operator==(const DirectionClass&) const = default;
};

inline constexpr int kDirectionClasses = 8;

enum class LabelMode {
  heading_lookahead,  ///< bin the heading change over a lookahead horizon
  rate_threshold,     ///< bin the smoothed per-frame rate times the horizon
};

struct LabelConfig {
  int smoothing_window = 15;   ///< odd, frames
  int lookahead_frames = 60;   ///< horizon for the heading change
  LabelMode mode = LabelMode::heading_lookahead;

  /// Defaults for a given frame rate: 0.5 s smoothing, 2 s lookahead.
  static LabelConfig for_fps(double fps) {
    LabelConfig config;
    config.lookahead_frames = std::max(1, static_cast<int>(std::lround(2.0 * fps)));
    return config;
  }

  void validate() const {
    if (smoothing_window < 1 || smoothing_window % 2 == 0) {
      throw InvariantViolation("smoothing_window must be odd and positive");
    }
    if (lookahead_frames < 1) {
      throw InvariantViolation("lookahead_frames must be at least 1");
    }
  }
};

struct DirectionLabelSeries {
  std::vector<DirectionClass> labels;
};

/// Maps an angle to its direction class. The bins are 45 degrees wide and
/// centered on the class angles; a boundary at an odd multiple of 22.5
/// degrees belongs to the class counter-clockwise of it.
inline DirectionClass class_for_angle(double radians) {
  const double deg = radians * 180.0 / std::numbers::pi;
  // wrap to (-180, 180]
  double wrapped = std::fmod(deg, 360.0);
  if (wrapped <= -180.0) wrapped += 360.0;
  if (wrapped > 180.0) wrapped -= 360.0;
  const long k = static_cast<long>(std::floor((wrapped + 22.5) / 45.0));
  return {static_cast<std::uint8_t>(((k % 8) + 8) % 8)};
}

/// Centered moving average. Near the ends the window shrinks symmetrically to
/// the frames available, so output length always equals input length.
inline YawSeries smooth(const YawSeries& series, int window) {
  if (series.values.empty()) {
    throw EmptySeries("cannot smooth an empty yaw series");
  }
  if (window < 1 || window % 2 == 0) {
    throw InvariantViolation("smoothing window must be odd and positive");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.values.size());
  const std::ptrdiff_t half = window / 2;
  YawSeries out;
  out.fps = series.fps;
  out.values.resize(series.values.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t reach = std::min({half, t, n - 1 - t});
    double sum = 0.0;
    for (std::ptrdiff_t k = t - reach; k <= t + reach; ++k) {
      sum += series.values[k];
    }
    out.values[t] = sum / static_cast<double>(2 * reach + 1);
  }
  return out;
}

/// Cumulative heading in radians; heading[t] is the sum of the yaw rates up
/// to and including frame t. Not wrapped.
inline std::vector<double> integrate_heading(const YawSeries& series) {
  if (series.values.empty()) {
    throw EmptySeries("cannot integrate an empty yaw series");
  }
  std::vector<double> heading(series.values.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < series.values.size(); ++t) {
    sum += series.values[t];
    heading[t] = sum;
  }
  return heading;
}

/// Discretizes the yaw signal into per-frame direction classes.
///
/// In heading_lookahead mode, frame t is labeled with the class of the
/// heading change between t and t + lookahead (clamped to the series end),
/// which is what a guidance display should point at next. In rate_threshold
/// mode the smoothed instantaneous rate, scaled by the lookahead horizon, is
/// binned instead.
inline DirectionLabelSeries label_frames(const YawSeries& series,
                                         const LabelConfig& config) {
  if (series.values.empty()) {
    throw EmptySeries("cannot label an empty yaw series");
  }
  config.validate();
  const std::size_t n = series.values.size();
  DirectionLabelSeries out;
  out.labels.resize(n);

  if (config.mode == LabelMode::heading_lookahead) {
    const std::vector<double> heading = integrate_heading(series);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t ahead =
          std::min(n - 1, t + static_cast<std::size_t>(config.lookahead_frames));
      out.labels[t] = class_for_angle(heading[ahead] - heading[t]);
    }
  } else {
    const YawSeries smoothed = smooth(series, config.smoothing_window);
    for (std::size_t t = 0; t < n; ++t) {
      out.labels[t] =
          class_for_angle(smoothed.values[t] * config.lookahead_frames);
    }
  }
  return out;
}

/// Inverse-frequency sampling weights: each class present in the labels gets
/// the same total mass, so rare turn frames are drawn as often as the
/// plentiful forward frames.
inline std::vector<double> class_weights(const DirectionLabelSeries& labels) {
  if (labels.labels.empty()) {
    throw EmptySeries("cannot weight an empty label series");
  }
  std::array<std::size_t, kDirectionClasses> counts{};
  for (const DirectionClass& label : labels.labels) {
    counts[label.index]++;
  }
  const double total = static_cast<double>(labels.labels.size());
  std::vector<double> weights(labels.labels.size());
  for (std::size_t t = 0; t < labels.labels.size(); ++t) {
    weights[t] = total / (kDirectionClasses *
                          static_cast<double>(counts[labels.labels[t].index]));
  }
  return weights;
}

/// Time-reverses the series and negates each value: played backward, a left
/// turn becomes a right turn. Used to label turn-around footage.
inline YawSeries reverse_series(const YawSeries& series) {
  YawSeries out;
  out.fps = series.fps;
  out.values.assign(series.values.rbegin(), series.values.rend());
  for (double& value : out.values) {
    value = -value;
  }
  return out;
}

/// Left/right mirror of a class: 1 <-> 7, 2 <-> 6, 3 <-> 5; 0 and 4 fixed.
inline DirectionClass mirror_class(DirectionClass label) {
  return {static_cast<std::uint8_t>((kDirectionClasses - label.index) %
                                    kDirectionClasses)};
}

}  // namespace navkit::heading_labeler
