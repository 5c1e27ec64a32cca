#include "toolmimic/mask.hpp"

#include <numeric>

#include "toolmimic/kernels.hpp"

namespace toolmimic {

std::size_t Mask::count() const {
  return std::size_t(std::accumulate(data.begin(), data.end(), std::uint64_t(0)));
}

std::vector<std::uint64_t> rle_encode(const Mask& mask) {
  std::vector<std::uint64_t> runs;
  std::uint8_t cur = 0;
  std::uint64_t len = 0;
  for (std::uint8_t px : mask.data) {
    if (px == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = px;
      len = 1;
    }
  }
  runs.push_back(len);
  if (mask.data.empty()) runs.clear();
  return runs;
}

Mask rle_decode(int width, int height, const std::vector<std::uint64_t>& runs) {
  Mask mask(width, height);
  std::size_t pos = 0;
  std::uint8_t cur = 0;
  for (std::uint64_t run : runs) {
    if (pos + run > mask.data.size()) {
      throw SchemaError("mask run-length data exceeds width*height");
    }
    for (std::uint64_t i = 0; i < run; ++i) mask.data[pos++] = cur;
    cur ^= 1;
  }
  if (pos != mask.data.size()) {
    throw SchemaError("mask run-length data does not cover width*height");
  }
  return mask;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw LengthMismatch("mask_iou: mask sizes differ");
  }
  std::uint64_t inter = 0, uni = 0;
  kern::active().mask_overlap(a.data.data(), b.data.data(), a.data.size(), &inter, &uni);
  if (uni == 0) return 0.0;
  return double(inter) / double(uni);
}

std::vector<std::pair<int, int>> mask_boundary(const Mask& mask) {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (!mask.at(u, v)) continue;
      bool edge = u == 0 || u == mask.width - 1 || v == 0 || v == mask.height - 1 ||
                  !mask.at(u - 1, v) || !mask.at(u + 1, v) || !mask.at(u, v - 1) || !mask.at(u, v + 1);
      if (edge) out.emplace_back(u, v);
    }
  }
  return out;
}

std::pair<double, double> mask_centroid(const Mask& mask) {
  double su = 0.0, sv = 0.0;
  std::uint64_t n = 0;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (mask.at(u, v)) {
        su += u;
        sv += v;
        ++n;
      }
    }
  }
  if (n == 0) throw EmptySet("mask_centroid: empty mask");
  return {su / double(n), sv / double(n)};
}

MaskBBox mask_bbox(const Mask& mask) {
  MaskBBox box{mask.width, mask.height, -1, -1};
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (!mask.at(u, v)) continue;
      if (u < box.u_min) box.u_min = u;
      if (v < box.v_min) box.v_min = v;
      if (u > box.u_max) box.u_max = u;
      if (v > box.v_max) box.v_max = v;
    }
  }
  if (box.u_max < 0) throw EmptySet("mask_bbox: empty mask");
  return box;
}

}  // namespace toolmimic
