#include "toolmimic/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace toolmimic {

void draw_disc(PortImage& img, double cu, double cv, int radius, std::uint8_t value) {
  int u0 = int(std::lround(cu));
  int v0 = int(std::lround(cv));
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      if (du * du + dv * dv <= radius * radius) img.set(u0 + du, v0 + dv, value);
    }
  }
}

PortImage image_from_mask(const Mask& mask) {
  PortImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.data.size(); ++i) img.gray[i] = mask.data[i] ? 128 : 0;
  return img;
}

PortImage render_cloud_splats(const CameraIntrinsics& intr, const std::vector<Vec3>& points,
                              int radius) {
  PortImage img(intr.width, intr.height);
  std::vector<double> zbuf(img.gray.size(), std::numeric_limits<double>::infinity());
  double zmin = std::numeric_limits<double>::infinity();
  double zmax = 0.0;
  for (const Vec3& p : points) {
    if (p.z() <= 0.0) continue;
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  if (!(zmax > 0.0)) return img;
  double span = std::max(zmax - zmin, 1e-9);
  for (const Vec3& p : points) {
    if (p.z() <= 0.0) continue;
    int u0 = int(std::lround(intr.fx * (p.x() / p.z()) + intr.cx));
    int v0 = int(std::lround(intr.fy * (p.y() / p.z()) + intr.cy));
    // near points bright, far points dim; background stays 0
    auto value = std::uint8_t(255.0 - 191.0 * (p.z() - zmin) / span);
    for (int dv = -radius; dv <= radius; ++dv) {
      for (int du = -radius; du <= radius; ++du) {
        if (du * du + dv * dv > radius * radius) continue;
        int u = u0 + du, v = v0 + dv;
        if (u < 0 || u >= img.width || v < 0 || v >= img.height) continue;
        std::size_t idx = std::size_t(v) * img.width + u;
        if (p.z() < zbuf[idx]) {
          zbuf[idx] = p.z();
          img.gray[idx] = value;
        }
      }
    }
  }
  return img;
}

void write_pgm(const std::string& path, const PortImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.gray.data()), std::streamsize(img.gray.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace toolmimic
