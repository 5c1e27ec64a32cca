#pragma once

#include <cstddef>
#include <cstdint>

namespace toolmimic::kern {

// Batch arithmetic kernels behind a runtime-selected dispatch table. The
// scalar implementations are the reference; SIMD variants must agree with
// them bit-for-bit for elementwise kernels and to 1e-12 relative for the
// reductions (lane accumulators reorder the sums). Keep per-element operation
// order identical in every variant; the build disables FP contraction.
struct Kernels {
  const char* name;

  // o = R * p + t, R row-major. Element order: ((r0*x + r1*y) + r2*z) + t.
  void (*transform_points)(const double r[9], const double t[3], const double* x, const double* y,
                           const double* z, std::size_t n, double* ox, double* oy, double* oz);

  // u = fx * (x/z) + cx, v = fy * (y/z) + cy. Caller guarantees z > 0.
  void (*project_points)(double fx, double fy, double cx, double cy, const double* x,
                         const double* y, const double* z, std::size_t n, double* u, double* v);

  // x = ((u - cx) / fx) * z, y = ((v - cy) / fy) * z. Caller guarantees z > 0.
  void (*lift_points)(double fx, double fy, double cx, double cy, const double* u, const double* v,
                      const double* z, std::size_t n, double* x, double* y);

  // Intersection / union pixel counts of two 0/1 byte masks.
  void (*mask_overlap)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                       std::uint64_t* inter, std::uint64_t* uni);

  // d2[i] = min(d2[i], (px[i]-qx)^2 + (py[i]-qy)^2). Farthest-point-sampling
  // inner update.
  void (*min_dist2_update)(const double* px, const double* py, std::size_t n, double qx, double qy,
                           double* d2);

  // mean_i ||b_i - a_i|| * inv_dt (reduction).
  double (*mean_step_speed)(const double* ax, const double* ay, const double* az, const double* bx,
                            const double* by, const double* bz, std::size_t n, double inv_dt);

  // h[r*3+c] = sum_i (f_i - cf)_r * (t_i - ct)_c (reduction).
  void (*cross_covariance)(const double* fx, const double* fy, const double* fz, const double* tx,
                           const double* ty, const double* tz, std::size_t n, const double cf[3],
                           const double ct[3], double h[9]);
};

/// Reference implementation (always available).
const Kernels& scalar();

/// True when the running CPU supports the AVX2 variants.
bool avx2_supported();

/// AVX2 implementations. Call only when avx2_supported().
const Kernels& avx2();

/// Table selected at startup: AVX2 when supported, else scalar. The
/// TOOLMIMIC_KERNELS environment variable ("scalar" or "avx2") overrides.
const Kernels& active();

}  // namespace toolmimic::kern
