#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "navkit/errors.hpp"
#include "navkit/heading_labeler.hpp"
#include "navkit/route_graph.hpp"

namespace navkit::nav_metrics {

using heading_labeler::DirectionClass;
using heading_labeler::DirectionLabelSeries;
using heading_labeler::kDirectionClasses;

using ConfusionMatrix =
    std::array<std::array<std::uint64_t, kDirectionClasses>, kDirectionClasses>;

struct F1Result {
  double value = 0.0;
  bool degenerate = false;  ///< no positive frames in either series
};

struct EvaluationReport {
  double accuracy = 0.0;
  double f1_binary = 0.0;
  bool f1_binary_degenerate = false;
  double f1_macro_turns = 0.0;
  double mean_angle_error_deg = 0.0;
  std::uint64_t frames = 0;
  ConfusionMatrix confusion{};  ///< rows ground truth, columns prediction
};

namespace detail {

inline void check_lengths(const DirectionLabelSeries& pred,
                          const DirectionLabelSeries& gt, bool allow_empty) {
  if (pred.labels.size() != gt.labels.size()) {
    throw LengthMismatch("prediction has " + std::to_string(pred.labels.size()) +
                         " frames, ground truth " +
                         std::to_string(gt.labels.size()));
  }
  if (!allow_empty && pred.labels.empty()) {
    throw EmptyInput("label series are empty");
  }
}

}  // namespace detail

/// Fraction of frames whose predicted class matches ground truth.
inline double accuracy(const DirectionLabelSeries& pred,
                       const DirectionLabelSeries& gt) {
  detail::check_lengths(pred, gt, false);
  std::uint64_t hits = 0;
  for (std::size_t t = 0; t < gt.labels.size(); ++t) {
    if (pred.labels[t] == gt.labels[t]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gt.labels.size());
}

/// Binary F1 where the positive class is any direction change (class != 0)
/// and the negative class is moving forward. Returns 0 with the degenerate
/// flag set when neither series contains a positive frame.
inline F1Result f1_direction_change(const DirectionLabelSeries& pred,
                                    const DirectionLabelSeries& gt) {
  detail::check_lengths(pred, gt, true);
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < gt.labels.size(); ++t) {
    const bool pred_positive = pred.labels[t].index != 0;
    const bool gt_positive = gt.labels[t].index != 0;
    if (pred_positive && gt_positive) ++tp;
    if (pred_positive && !gt_positive) ++fp;
    if (!pred_positive && gt_positive) ++fn;
  }
  F1Result result;
  result.degenerate = (tp + fp + fn == 0);
  if (tp > 0) {
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    result.value = 2.0 * precision * recall / (precision + recall);
  }
  return result;
}

/// Macro-averaged one-vs-rest F1 over the non-forward classes that occur in
/// the ground truth.
inline double f1_macro_turns(const DirectionLabelSeries& pred,
                             const DirectionLabelSeries& gt) {
  detail::check_lengths(pred, gt, true);
  double sum = 0.0;
  int present = 0;
  for (int cls = 1; cls < kDirectionClasses; ++cls) {
    std::uint64_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t t = 0; t < gt.labels.size(); ++t) {
      const bool pred_is = pred.labels[t].index == cls;
      const bool gt_is = gt.labels[t].index == cls;
      if (gt_is) ++support;
      if (pred_is && gt_is) ++tp;
      if (pred_is && !gt_is) ++fp;
      if (!pred_is && gt_is) ++fn;
    }
    if (support == 0) continue;
    ++present;
    if (tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
      sum += 2.0 * precision * recall / (precision + recall);
    }
  }
  return present == 0 ? 0.0 : sum / present;
}

/// Circular distance in degrees between two class bin centers.
inline double class_angle_distance(DirectionClass a, DirectionClass b) {
  const double delta =
      std::abs(45.0 * (static_cast<double>(a.index) - static_cast<double>(b.index)));
  return std::min(delta, 360.0 - delta);
}

/// Mean circular distance between predicted and ground-truth bin centers,
/// degrees in [0, 180].
inline double angle_error(const DirectionLabelSeries& pred,
                          const DirectionLabelSeries& gt) {
  detail::check_lengths(pred, gt, false);
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.labels.size(); ++t) {
    sum += class_angle_distance(pred.labels[t], gt.labels[t]);
  }
  return sum / static_cast<double>(gt.labels.size());
}

inline EvaluationReport evaluate(const DirectionLabelSeries& pred,
                                 const DirectionLabelSeries& gt) {
  detail::check_lengths(pred, gt, false);
  EvaluationReport report;
  report.frames = gt.labels.size();
  report.accuracy = accuracy(pred, gt);
  const F1Result f1 = f1_direction_change(pred, gt);
  report.f1_binary = f1.value;
  report.f1_binary_degenerate = f1.degenerate;
  report.f1_macro_turns = f1_macro_turns(pred, gt);
  report.mean_angle_error_deg = angle_error(pred, gt);
  for (std::size_t t = 0; t < gt.labels.size(); ++t) {
    report.confusion[gt.labels[t].index][pred.labels[t].index]++;
  }
  return report;
}

enum class KeyMomentKind { intersection, turn_around };

/// Half-open frame window around a consequential navigation decision.
struct KeyMomentWindow {
  std::uint64_t frame_start = 0;
  std::uint64_t frame_end = 0;
  KeyMomentKind kind = KeyMomentKind::intersection;
};

/// Cuts the evaluation windows of a path: for each triplet, the
/// `window_frames` frames leading up to the node crossing (taken as the
/// midpoint of that triplet's segment, truncated at the segment start), plus
/// one window per run of backward-sector ground-truth labels (classes 3..5),
/// which mark turn-around situations.
inline std::vector<KeyMomentWindow> slice_key_moments(
    const DirectionLabelSeries& labels, const route_graph::SyntheticPath& path,
    std::uint64_t window_frames = 60) {
  std::uint64_t total = 0;
  for (const route_graph::TripletAnnotation& triplet : path.triplets) {
    total += static_cast<std::uint64_t>(triplet.segment.frame_count());
  }
  if (total != labels.labels.size()) {
    throw MisalignedPath("path segments cover " + std::to_string(total) +
                         " frames, labels cover " +
                         std::to_string(labels.labels.size()));
  }

  std::vector<KeyMomentWindow> windows;
  std::uint64_t offset = 0;
  for (const route_graph::TripletAnnotation& triplet : path.triplets) {
    const std::uint64_t length =
        static_cast<std::uint64_t>(triplet.segment.frame_count());
    const std::uint64_t crossing = offset + length / 2;
    const std::uint64_t start =
        std::max(offset, crossing >= window_frames ? crossing - window_frames
                                                   : std::uint64_t{0});
    if (start < crossing) {
      windows.push_back({start, crossing, KeyMomentKind::intersection});
    }
    offset += length;
  }

  const auto backward = [](DirectionClass label) {
    return label.index >= 3 && label.index <= 5;
  };
  std::size_t t = 0;
  while (t < labels.labels.size()) {
    if (!backward(labels.labels[t])) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < labels.labels.size() && backward(labels.labels[end])) ++end;
    windows.push_back({t, end, KeyMomentKind::turn_around});
    t = end;
  }
  return windows;
}

struct KeyMomentReport {
  double intersection_accuracy = 0.0;
  double turn_around_accuracy = 0.0;
  std::uint64_t intersection_windows = 0;
  std::uint64_t turn_around_windows = 0;
};

/// Accuracy restricted to key-moment windows. Per-frame by default; with
/// `majority_vote` each window counts once, scored by its majority class.
inline KeyMomentReport evaluate_key_moments(
    const DirectionLabelSeries& pred, const DirectionLabelSeries& gt,
    const std::vector<KeyMomentWindow>& windows, bool majority_vote = false) {
  detail::check_lengths(pred, gt, false);
  KeyMomentReport report;
  std::uint64_t frame_hits[2] = {0, 0};
  std::uint64_t frame_totals[2] = {0, 0};
  std::uint64_t window_hits[2] = {0, 0};
  std::uint64_t window_totals[2] = {0, 0};
  for (const KeyMomentWindow& window : windows) {
    if (window.frame_end > gt.labels.size()) {
      throw MisalignedPath("window ends past the label series");
    }
    const int kind = window.kind == KeyMomentKind::intersection ? 0 : 1;
    std::array<std::uint64_t, kDirectionClasses> pred_votes{};
    std::array<std::uint64_t, kDirectionClasses> gt_votes{};
    for (std::uint64_t t = window.frame_start; t < window.frame_end; ++t) {
      frame_totals[kind]++;
      if (pred.labels[t] == gt.labels[t]) frame_hits[kind]++;
      pred_votes[pred.labels[t].index]++;
      gt_votes[gt.labels[t].index]++;
    }
    window_totals[kind]++;
    const auto majority = [](const std::array<std::uint64_t, 8>& votes) {
      return static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                              votes.begin());
    };
    if (majority(pred_votes) == majority(gt_votes)) window_hits[kind]++;
  }
  const auto ratio = [](std::uint64_t hits, std::uint64_t total) {
    return total == 0 ? 0.0
                      : static_cast<double>(hits) / static_cast<double>(total);
  };
  report.intersection_windows = window_totals[0];
  report.turn_around_windows = window_totals[1];
  if (majority_vote) {
    report.intersection_accuracy = ratio(window_hits[0], window_totals[0]);
    report.turn_around_accuracy = ratio(window_hits[1], window_totals[1]);
  } else {
    report.intersection_accuracy = ratio(frame_hits[0], frame_totals[0]);
    report.turn_around_accuracy = ratio(frame_hits[1], frame_totals[1]);
  }
  return report;
}

}  // namespace navkit::nav_metrics
