#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "navkit/errors.hpp"
#include "navkit/raster.hpp"
#include "navkit/rng.hpp"

namespace navkit::mask_augment {

struct ImageSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// Axis-aligned masking rectangle, top-left corner plus size, in pixels.
struct MaskBox {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  bool inside(ImageSize size) const {
    return x >= 0 && y >= 0 && width >= 1 && height >= 1 &&
           x + width <= static_cast<std::int64_t>(size.width) &&
           y + height <= static_cast<std::int64_t>(size.height);
  }

  bool contains(std::int64_t px, std::int64_t py) const {
    return px >= x && px < x + width && py >= y && py < y + height;
  }

  bool operator==(const MaskBox&) const = default;
};

/// How masked pixels are filled: uniform per-pixel noise over [lo, hi],
/// reproducible from the seed.
struct FillNoise {
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
};

struct MaskPlan {
  std::vector<MaskBox> boxes;
  FillNoise fill;
};

/// Fractional side-length range of masking boxes relative to the image side.
struct SizeRange {
  double min_frac = 0.1;
  double max_frac = 0.3;

  void validate() const {
    if (!(min_frac > 0.0) || !(min_frac <= max_frac) || !(max_frac <= 1.0)) {
      throw InvalidSizeRange("need 0 < min_frac <= max_frac <= 1, got [" +
                             std::to_string(min_frac) + ", " +
                             std::to_string(max_frac) + "]");
    }
  }
};

/// Normalized saliency grid driving attention-guided masking. Entries must be
/// non-negative with a positive total.
struct AttentionMap {
  Raster grid;  ///< single channel, image-sized

  void validate() const {
    if (grid.channels() != 1) {
      throw DimensionMismatch("attention grid must have one channel");
    }
    double total = 0.0;
    for (float value : grid.data()) {
      if (!std::isfinite(value) || value < 0.0f) {
        throw DegenerateAttention("attention entries must be finite and >= 0");
      }
      total += value;
    }
    if (!(total > 0.0)) {
      throw DegenerateAttention("attention grid sums to zero");
    }
  }
};

/// Masking plan covering externally supplied person detections. Boxes are
/// clipped to the image; detections entirely outside are dropped.
inline MaskPlan people_mask(std::span<const MaskBox> detections, ImageSize size,
                            std::uint64_t rng_seed = 0) {
  MaskPlan plan;
  plan.fill.seed = rng_seed;
  for (const MaskBox& detection : detections) {
    const std::int64_t x0 = std::max<std::int64_t>(detection.x, 0);
    const std::int64_t y0 = std::max<std::int64_t>(detection.y, 0);
    const std::int64_t x1 = std::min<std::int64_t>(
        detection.x + detection.width, static_cast<std::int64_t>(size.width));
    const std::int64_t y1 = std::min<std::int64_t>(
        detection.y + detection.height, static_cast<std::int64_t>(size.height));
    if (x1 - x0 >= 1 && y1 - y0 >= 1) {
      plan.boxes.push_back({x0, y0, x1 - x0, y1 - y0});
    }
  }
  return plan;
}

namespace detail {

inline std::int64_t sample_side(Rng& rng, std::uint32_t image_side,
                                const SizeRange& range) {
  const double frac = rng.uniform(range.min_frac, range.max_frac);
  const std::int64_t side = std::llround(frac * image_side);
  return std::clamp<std::int64_t>(side, 1, image_side);
}

}  // namespace detail

/// `count` boxes at uniformly random in-bounds positions with uniformly
/// random fractional sizes. Deterministic for a fixed seed.
inline MaskPlan rand_mask(ImageSize size, int count, const SizeRange& range,
                          std::uint64_t rng_seed) {
  range.validate();
  Rng rng(rng_seed);
  MaskPlan plan;
  plan.fill.seed = rng.next_u64();
  for (int i = 0; i < count; ++i) {
    MaskBox box;
    box.width = detail::sample_side(rng, size.width, range);
    box.height = detail::sample_side(rng, size.height, range);
    box.x = static_cast<std::int64_t>(rng.uniform_index(size.width - box.width + 1));
    box.y = static_cast<std::int64_t>(rng.uniform_index(size.height - box.height + 1));
    plan.boxes.push_back(box);
  }
  return plan;
}

/// Like rand_mask, but box centers are drawn from the attention grid treated
/// as a probability mass function, so masks land where the saliency is. Boxes
/// are shifted by the minimal amount needed to stay inside the image.
inline MaskPlan grad_mask(const AttentionMap& attention, int count,
                          const SizeRange& range, std::uint64_t rng_seed) {
  range.validate();
  attention.validate();
  const ImageSize size{attention.grid.width(), attention.grid.height()};

  std::vector<double> cumulative(attention.grid.data().size());
  double total = 0.0;
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    total += attention.grid.data()[i];
    cumulative[i] = total;
  }

  Rng rng(rng_seed);
  MaskPlan plan;
  plan.fill.seed = rng.next_u64();
  for (int i = 0; i < count; ++i) {
    MaskBox box;
    box.width = detail::sample_side(rng, size.width, range);
    box.height = detail::sample_side(rng, size.height, range);
    const double pick = rng.uniform() * total;
    const std::size_t flat =
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin();
    const std::size_t clamped = std::min(flat, cumulative.size() - 1);
    const std::int64_t center_x = static_cast<std::int64_t>(clamped % size.width);
    const std::int64_t center_y = static_cast<std::int64_t>(clamped / size.width);
    box.x = std::clamp<std::int64_t>(center_x - box.width / 2, 0,
                                     size.width - box.width);
    box.y = std::clamp<std::int64_t>(center_y - box.height / 2, 0,
                                     size.height - box.height);
    plan.boxes.push_back(box);
  }
  return plan;
}

/// Curriculum sampling weights over a training set: frames flagged as errors
/// ("hard") receive total mass `hard_fraction`, the rest share the remainder,
/// uniformly within each group. Weights sum to 1. If one group is empty the
/// other receives all mass.
inline std::vector<double> curriculum_weights(std::span<const bool> error_flags,
                                              double hard_fraction = 0.8) {
  if (error_flags.empty()) {
    throw EmptyInput("curriculum_weights needs at least one example");
  }
  if (!(hard_fraction > 0.0) || !(hard_fraction < 1.0)) {
    throw InvariantViolation("hard_fraction must lie strictly between 0 and 1");
  }
  std::size_t hard = 0;
  for (bool flag : error_flags) {
    if (flag) ++hard;
  }
  const std::size_t easy = error_flags.size() - hard;

  double hard_mass = hard_fraction;
  double easy_mass = 1.0 - hard_fraction;
  if (hard == 0) {
    hard_mass = 0.0;
    easy_mass = 1.0;
  } else if (easy == 0) {
    hard_mass = 1.0;
    easy_mass = 0.0;
  }

  std::vector<double> weights(error_flags.size());
  for (std::size_t i = 0; i < error_flags.size(); ++i) {
    weights[i] = error_flags[i] ? hard_mass / static_cast<double>(hard)
                                : easy_mass / static_cast<double>(easy);
  }
  return weights;
}

/// Fills the plan's boxes with seeded uniform noise; pixels outside every box
/// are untouched. All channels of a masked pixel are overwritten.
inline void apply_plan(Raster& image, const MaskPlan& plan) {
  Rng rng(plan.fill.seed);
  const ImageSize size{image.width(), image.height()};
  for (const MaskBox& box : plan.boxes) {
    if (!box.inside(size)) {
      throw InvariantViolation("mask box lies outside the image");
    }
    for (std::int64_t y = box.y; y < box.y + box.height; ++y) {
      for (std::int64_t x = box.x; x < box.x + box.width; ++x) {
        for (std::uint16_t c = 0; c < image.channels(); ++c) {
          image.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                   c) =
              static_cast<float>(rng.uniform(plan.fill.lo, plan.fill.hi));
        }
      }
    }
  }
}

}  // namespace navkit::mask_augment
