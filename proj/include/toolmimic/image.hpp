#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toolmimic/geometry.hpp"
#include "toolmimic/mask.hpp"

namespace toolmimic {

/// Row-major 8-bit grayscale image used for port payloads and debug renders.
struct PortImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> gray;

  PortImage() = default;
  PortImage(int w, int h) : width(w), height(h), gray(std::size_t(w) * h, 0) {}
  std::uint8_t at(int u, int v) const { return gray[std::size_t(v) * width + u]; }
  void set(int u, int v, std::uint8_t val) {
    if (u >= 0 && u < width && v >= 0 && v < height) gray[std::size_t(v) * width + u] = val;
  }
};

/// Filled disc splat, clipped to the image.
void draw_disc(PortImage& img, double cu, double cv, int radius, std::uint8_t value);

/// Grayscale render of mask pixels (value 128).
PortImage image_from_mask(const Mask& mask);

/// Z-buffered point splat render of a camera-frame cloud. Each point is
/// splatted as a disc of the given pixel radius; nearer points win. Gray
/// value encodes depth (near = bright), background stays 0.
PortImage render_cloud_splats(const CameraIntrinsics& intr, const std::vector<Vec3>& points,
                              int radius = 2);

/// Binary PGM (P5) writer. Throws IoError on failure.
void write_pgm(const std::string& path, const PortImage& img);

}  // namespace toolmimic
