#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcqa/cloud.hpp"

namespace pcqa {

// Dense row-major 2D buffer.
template <typename T>
struct Plane {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const T& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool same_shape_as(const Plane& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Plane&) const = default;
};

// Interleaved 8-bit RGB image.
struct RgbImage {
  int rows = 0;
  int cols = 0;
  std::vector<Rgb8> px;

  RgbImage() = default;
  RgbImage(int r, int c, Rgb8 fill = {0, 0, 0})
      : rows(r), cols(c), px(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  Rgb8& at(int r, int c) { return px[static_cast<std::size_t>(r) * cols + c]; }
  const Rgb8& at(int r, int c) const { return px[static_cast<std::size_t>(r) * cols + c]; }
  bool same_shape_as(const RgbImage& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const RgbImage&) const = default;
};

using MaskImage = Plane<std::uint8_t>;   // 0 = empty, 1 = occupied
using DepthImage = Plane<std::int32_t>;
using LumaImage = Plane<double>;

}  // namespace pcqa
