#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "toolmimic/errors.hpp"

namespace toolmimic {

/// Binary image mask. Pixels are stored row-major as strictly 0/1 bytes.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height, values 0 or 1

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), data(std::size_t(w) * std::size_t(h), 0) {}

  std::uint8_t at(int u, int v) const { return data[std::size_t(v) * width + u]; }
  void set(int u, int v, std::uint8_t val) { data[std::size_t(v) * width + u] = val ? 1 : 0; }
  bool in_bounds(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
  std::size_t count() const;
};

/// Row-major run-length encoding. Runs alternate zero/one and start with the
/// zero run (possibly of length 0); run lengths sum to width*height.
std::vector<std::uint64_t> rle_encode(const Mask& mask);
Mask rle_decode(int width, int height, const std::vector<std::uint64_t>& runs);

/// Intersection-over-union of two same-size masks. Empty union gives 0.
double mask_iou(const Mask& a, const Mask& b);

/// Pixels of `mask` that have at least one 4-neighbor outside the mask
/// (image border counts as outside). Row-major order.
std::vector<std::pair<int, int>> mask_boundary(const Mask& mask);

/// Mean pixel coordinate of the set pixels. Throws EmptySet on an empty mask.
std::pair<double, double> mask_centroid(const Mask& mask);

/// Tight bounding box {u_min, v_min, u_max, v_max} (inclusive). Throws EmptySet.
struct MaskBBox {
  int u_min, v_min, u_max, v_max;
  int width() const { return u_max - u_min + 1; }
  int height() const { return v_max - v_min + 1; }
};
MaskBBox mask_bbox(const Mask& mask);

}  // namespace toolmimic
