// AVX2 variants of the batch kernels. Per-element operation order matches the
// scalar reference exactly (mul/add, no FMA), so elementwise kernels are
// bit-identical; reductions use four lane accumulators and differ only by
// summation order. Tails below the vector width run the scalar expressions.

#include "toolmimic/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define TOOLMIMIC_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

#include <cmath>

namespace toolmimic::kern {

#if TOOLMIMIC_HAVE_AVX2_BUILD

namespace {

void transform_points_avx2(const double r[9], const double t[3], const double* x, const double* y,
                           const double* z, std::size_t n, double* ox, double* oy, double* oz) {
  std::size_t i = 0;
  const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
  const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
  const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);
  const __m256d t0 = _mm256_set1_pd(t[0]), t1 = _mm256_set1_pd(t[1]), t2 = _mm256_set1_pd(t[2]);
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vz = _mm256_loadu_pd(z + i);
    __m256d a = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, vx), _mm256_mul_pd(r1, vy)), _mm256_mul_pd(r2, vz)), t0);
    __m256d b = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r3, vx), _mm256_mul_pd(r4, vy)), _mm256_mul_pd(r5, vz)), t1);
    __m256d c = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r6, vx), _mm256_mul_pd(r7, vy)), _mm256_mul_pd(r8, vz)), t2);
    _mm256_storeu_pd(ox + i, a);
    _mm256_storeu_pd(oy + i, b);
    _mm256_storeu_pd(oz + i, c);
  }
  for (; i < n; ++i) {
    ox[i] = ((r[0] * x[i] + r[1] * y[i]) + r[2] * z[i]) + t[0];
    oy[i] = ((r[3] * x[i] + r[4] * y[i]) + r[5] * z[i]) + t[1];
    oz[i] = ((r[6] * x[i] + r[7] * y[i]) + r[8] * z[i]) + t[2];
  }
}

void project_points_avx2(double fx, double fy, double cx, double cy, const double* x,
                         const double* y, const double* z, std::size_t n, double* u, double* v) {
  std::size_t i = 0;
  const __m256d vfx = _mm256_set1_pd(fx), vfy = _mm256_set1_pd(fy);
  const __m256d vcx = _mm256_set1_pd(cx), vcy = _mm256_set1_pd(cy);
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vz = _mm256_loadu_pd(z + i);
    _mm256_storeu_pd(u + i, _mm256_add_pd(_mm256_mul_pd(vfx, _mm256_div_pd(vx, vz)), vcx));
    _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_mul_pd(vfy, _mm256_div_pd(vy, vz)), vcy));
  }
  for (; i < n; ++i) {
    u[i] = fx * (x[i] / z[i]) + cx;
    v[i] = fy * (y[i] / z[i]) + cy;
  }
}

void lift_points_avx2(double fx, double fy, double cx, double cy, const double* u, const double* v,
                      const double* z, std::size_t n, double* x, double* y) {
  std::size_t i = 0;
  const __m256d vfx = _mm256_set1_pd(fx), vfy = _mm256_set1_pd(fy);
  const __m256d vcx = _mm256_set1_pd(cx), vcy = _mm256_set1_pd(cy);
  for (; i + 4 <= n; i += 4) {
    __m256d vu = _mm256_loadu_pd(u + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    __m256d vz = _mm256_loadu_pd(z + i);
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_div_pd(_mm256_sub_pd(vu, vcx), vfx), vz));
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_div_pd(_mm256_sub_pd(vv, vcy), vfy), vz));
  }
  for (; i < n; ++i) {
    x[i] = ((u[i] - cx) / fx) * z[i];
    y[i] = ((v[i] - cy) / fy) * z[i];
  }
}

void mask_overlap_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t n,
                       std::uint64_t* inter, std::uint64_t* uni) {
  std::size_t i = 0;
  const __m256i zero = _mm256_setzero_si256();
  __m256i isum = zero, usum = zero;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // masks store strictly 0/1 bytes, so AND/OR give per-pixel indicator bytes
    __m256i vi = _mm256_and_si256(va, vb);
    __m256i vu = _mm256_or_si256(va, vb);
    isum = _mm256_add_epi64(isum, _mm256_sad_epu8(vi, zero));
    usum = _mm256_add_epi64(usum, _mm256_sad_epu8(vu, zero));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), isum);
  std::uint64_t ic = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), usum);
  std::uint64_t uc = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    ic += static_cast<std::uint64_t>(a[i] & b[i]);
    uc += static_cast<std::uint64_t>(a[i] | b[i]);
  }
  *inter = ic;
  *uni = uc;
}

void min_dist2_update_avx2(const double* px, const double* py, std::size_t n, double qx, double qy,
                           double* d2) {
  std::size_t i = 0;
  const __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
  for (; i + 4 <= n; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), vqx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), vqy);
    __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(d2 + i, _mm256_min_pd(d, _mm256_loadu_pd(d2 + i)));
  }
  for (; i < n; ++i) {
    double dx = px[i] - qx;
    double dy = py[i] - qy;
    double d = dx * dx + dy * dy;
    if (d < d2[i]) d2[i] = d;
  }
}

double mean_step_speed_avx2(const double* ax, const double* ay, const double* az, const double* bx,
                            const double* by, const double* bz, std::size_t n, double inv_dt) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(bx + i), _mm256_loadu_pd(ax + i));
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(by + i), _mm256_loadu_pd(ay + i));
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(bz + i), _mm256_loadu_pd(az + i));
    __m256d d = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                              _mm256_mul_pd(dz, dz));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    double dx = bx[i] - ax[i];
    double dy = by[i] - ay[i];
    double dz = bz[i] - az[i];
    sum += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return sum / double(n) * inv_dt;
}

void cross_covariance_avx2(const double* fx, const double* fy, const double* fz, const double* tx,
                           const double* ty, const double* tz, std::size_t n, const double cf[3],
                           const double ct[3], double h[9]) {
  std::size_t i = 0;
  const __m256d cf0 = _mm256_set1_pd(cf[0]), cf1 = _mm256_set1_pd(cf[1]), cf2 = _mm256_set1_pd(cf[2]);
  const __m256d ct0 = _mm256_set1_pd(ct[0]), ct1 = _mm256_set1_pd(ct[1]), ct2 = _mm256_set1_pd(ct[2]);
  __m256d a[9];
  for (int k = 0; k < 9; ++k) a[k] = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d f0 = _mm256_sub_pd(_mm256_loadu_pd(fx + i), cf0);
    __m256d f1 = _mm256_sub_pd(_mm256_loadu_pd(fy + i), cf1);
    __m256d f2 = _mm256_sub_pd(_mm256_loadu_pd(fz + i), cf2);
    __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(tx + i), ct0);
    __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(ty + i), ct1);
    __m256d t2 = _mm256_sub_pd(_mm256_loadu_pd(tz + i), ct2);
    a[0] = _mm256_add_pd(a[0], _mm256_mul_pd(f0, t0));
    a[1] = _mm256_add_pd(a[1], _mm256_mul_pd(f0, t1));
    a[2] = _mm256_add_pd(a[2], _mm256_mul_pd(f0, t2));
    a[3] = _mm256_add_pd(a[3], _mm256_mul_pd(f1, t0));
    a[4] = _mm256_add_pd(a[4], _mm256_mul_pd(f1, t1));
    a[5] = _mm256_add_pd(a[5], _mm256_mul_pd(f1, t2));
    a[6] = _mm256_add_pd(a[6], _mm256_mul_pd(f2, t0));
    a[7] = _mm256_add_pd(a[7], _mm256_mul_pd(f2, t1));
    a[8] = _mm256_add_pd(a[8], _mm256_mul_pd(f2, t2));
  }
  alignas(32) double lanes[4];
  for (int k = 0; k < 9; ++k) {
    _mm256_store_pd(lanes, a[k]);
    h[k] = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  }
  for (; i < n; ++i) {
    double f0 = fx[i] - cf[0], f1 = fy[i] - cf[1], f2 = fz[i] - cf[2];
    double t0 = tx[i] - ct[0], t1 = ty[i] - ct[1], t2 = tz[i] - ct[2];
    h[0] += f0 * t0;
    h[1] += f0 * t1;
    h[2] += f0 * t2;
    h[3] += f1 * t0;
    h[4] += f1 * t1;
    h[5] += f1 * t2;
    h[6] += f2 * t0;
    h[7] += f2 * t1;
    h[8] += f2 * t2;
  }
}

}  // namespace

const Kernels& avx2() {
  static const Kernels k = {
      "avx2",
      transform_points_avx2,
      project_points_avx2,
      lift_points_avx2,
      mask_overlap_avx2,
      min_dist2_update_avx2,
      mean_step_speed_avx2,
      cross_covariance_avx2,
  };
  return k;
}

#else

const Kernels& avx2() { return scalar(); }

#endif

}  // namespace toolmimic::kern
