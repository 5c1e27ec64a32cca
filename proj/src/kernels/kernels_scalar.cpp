#include <cmath>

#include "toolmimic/kernels.hpp"

namespace toolmimic::kern {
namespace {

void transform_points_scalar(const double r[9], const double t[3], const double* x, const double* y,
                             const double* z, std::size_t n, double* ox, double* oy, double* oz) {
  for (std::size_t i = 0; i < n; ++i) {
    ox[i] = ((r[0] * x[i] + r[1] * y[i]) + r[2] * z[i]) + t[0];
    oy[i] = ((r[3] * x[i] + r[4] * y[i]) + r[5] * z[i]) + t[1];
    oz[i] = ((r[6] * x[i] + r[7] * y[i]) + r[8] * z[i]) + t[2];
  }
}

void project_points_scalar(double fx, double fy, double cx, double cy, const double* x,
                           const double* y, const double* z, std::size_t n, double* u, double* v) {
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = fx * (x[i] / z[i]) + cx;
    v[i] = fy * (y[i] / z[i]) + cy;
  }
}

void lift_points_scalar(double fx, double fy, double cx, double cy, const double* u, const double* v,
                        const double* z, std::size_t n, double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ((u[i] - cx) / fx) * z[i];
    y[i] = ((v[i] - cy) / fy) * z[i];
  }
}

void mask_overlap_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                         std::uint64_t* inter, std::uint64_t* uni) {
  std::uint64_t ic = 0, uc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ic += static_cast<std::uint64_t>(a[i] & b[i]);
    uc += static_cast<std::uint64_t>(a[i] | b[i]);
  }
  *inter = ic;
  *uni = uc;
}

void min_dist2_update_scalar(const double* px, const double* py, std::size_t n, double qx, double qy,
                             double* d2) {
  for (std::size_t i = 0; i < n; ++i) {
    double dx = px[i] - qx;
    double dy = py[i] - qy;
    double d = dx * dx + dy * dy;
    if (d < d2[i]) d2[i] = d;
  }
}

double mean_step_speed_scalar(const double* ax, const double* ay, const double* az, const double* bx,
                              const double* by, const double* bz, std::size_t n, double inv_dt) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = bx[i] - ax[i];
    double dy = by[i] - ay[i];
    double dz = bz[i] - az[i];
    acc += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return acc / double(n) * inv_dt;
}

void cross_covariance_scalar(const double* fx, const double* fy, const double* fz, const double* tx,
                             const double* ty, const double* tz, std::size_t n, const double cf[3],
                             const double ct[3], double h[9]) {
  double a00 = 0, a01 = 0, a02 = 0, a10 = 0, a11 = 0, a12 = 0, a20 = 0, a21 = 0, a22 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double f0 = fx[i] - cf[0], f1 = fy[i] - cf[1], f2 = fz[i] - cf[2];
    double t0 = tx[i] - ct[0], t1 = ty[i] - ct[1], t2 = tz[i] - ct[2];
    a00 += f0 * t0;
    a01 += f0 * t1;
    a02 += f0 * t2;
    a10 += f1 * t0;
    a11 += f1 * t1;
    a12 += f1 * t2;
    a20 += f2 * t0;
    a21 += f2 * t1;
    a22 += f2 * t2;
  }
  h[0] = a00;
  h[1] = a01;
  h[2] = a02;
  h[3] = a10;
  h[4] = a11;
  h[5] = a12;
  h[6] = a20;
  h[7] = a21;
  h[8] = a22;
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k = {
      "scalar",
      transform_points_scalar,
      project_points_scalar,
      lift_points_scalar,
      mask_overlap_scalar,
      min_dist2_update_scalar,
      mean_step_speed_scalar,
      cross_covariance_scalar,
  };
  return k;
}

}  // namespace toolmimic::kern
