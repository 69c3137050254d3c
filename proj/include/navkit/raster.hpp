#pragma once

#include <cstdint>
#include <vector>

#include "navkit/errors.hpp"

namespace navkit {

/// Dense float image, row-major and channel-interleaved. One channel holds
/// depth or attention grids, two channels hold optical flow (u, v).
class Raster {
 public:
  Raster() = default;

  Raster(std::uint32_t width, std::uint32_t height, std::uint16_t channels,
         float fill = 0.0f)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width == 0 || height == 0 || channels == 0) {
      throw DimensionMismatch("raster dimensions must be nonzero");
    }
  }

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint16_t channels() const { return channels_; }

  float& at(std::uint32_t x, std::uint32_t y, std::uint16_t c = 0) {
    return data_[index(x, y, c)];
  }
  float at(std::uint32_t x, std::uint32_t y, std::uint16_t c = 0) const {
    return data_[index(x, y, c)];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool operator==(const Raster& other) const = default;

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y, std::uint16_t c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint16_t channels_ = 0;
  std::vector<float> data_;
};

}  // namespace navkit
