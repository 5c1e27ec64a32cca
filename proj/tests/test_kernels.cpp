// Scalar/AVX2 kernel equivalence. Elementwise kernels must agree bitwise with
// the scalar reference; reductions to 1e-12 relative (lane sums reorder).

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "toolmimic/kernels.hpp"

using namespace toolmimic;

namespace {

const std::vector<std::size_t> kSizes = {0, 1, 3, 4, 5, 7, 31, 32, 33, 100, 1023};

std::vector<double> random_doubles(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = d(rng);
  return out;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("active kernel table is one of the known variants") {
  const kern::Kernels& k = kern::active();
  bool known = std::string(k.name) == "scalar" || std::string(k.name) == "avx2";
  CHECK(known);
  if (!kern::avx2_supported()) {
    CHECK(std::string(k.name) == "scalar");
  }
}

TEST_CASE("transform_points variants agree bitwise") {
  if (!kern::avx2_supported()) return;
  std::mt19937 rng(101);
  double r[9], t[3];
  for (double& v : r) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (double& v : t) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (std::size_t n : kSizes) {
    auto x = random_doubles(rng, n, -2, 2), y = random_doubles(rng, n, -2, 2),
         z = random_doubles(rng, n, -2, 2);
    std::vector<double> sx(n), sy(n), sz(n), vx(n), vy(n), vz(n);
    kern::scalar().transform_points(r, t, x.data(), y.data(), z.data(), n, sx.data(), sy.data(), sz.data());
    kern::avx2().transform_points(r, t, x.data(), y.data(), z.data(), n, vx.data(), vy.data(), vz.data());
    CHECK(bitwise_equal(sx, vx));
    CHECK(bitwise_equal(sy, vy));
    CHECK(bitwise_equal(sz, vz));
  }
}

TEST_CASE("project_points variants agree bitwise") {
  if (!kern::avx2_supported()) return;
  std::mt19937 rng(102);
  for (std::size_t n : kSizes) {
    auto x = random_doubles(rng, n, -1, 1), y = random_doubles(rng, n, -1, 1),
         z = random_doubles(rng, n, 0.2, 4.0);
    std::vector<double> su(n), sv(n), vu(n), vv(n);
    kern::scalar().project_points(500, 510, 320, 240, x.data(), y.data(), z.data(), n, su.data(), sv.data());
    kern::avx2().project_points(500, 510, 320, 240, x.data(), y.data(), z.data(), n, vu.data(), vv.data());
    CHECK(bitwise_equal(su, vu));
    CHECK(bitwise_equal(sv, vv));
  }
}

TEST_CASE("lift_points variants agree bitwise and invert projection") {
  if (kern::avx2_supported()) {
    std::mt19937 rng(103);
    for (std::size_t n : kSizes) {
      auto u = random_doubles(rng, n, 0, 640), v = random_doubles(rng, n, 0, 480),
           z = random_doubles(rng, n, 0.2, 4.0);
      std::vector<double> sx(n), sy(n), vx(n), vy(n);
      kern::scalar().lift_points(500, 510, 320, 240, u.data(), v.data(), z.data(), n, sx.data(), sy.data());
      kern::avx2().lift_points(500, 510, 320, 240, u.data(), v.data(), z.data(), n, vx.data(), vy.data());
      CHECK(bitwise_equal(sx, vx));
      CHECK(bitwise_equal(sy, vy));
    }
  }
  // lift then project is the identity (up to roundoff) regardless of variant
  std::mt19937 rng(104);
  std::size_t n = 257;
  auto u = random_doubles(rng, n, 0, 640), v = random_doubles(rng, n, 0, 480),
       z = random_doubles(rng, n, 0.2, 4.0);
  std::vector<double> x(n), y(n), u2(n), v2(n);
  kern::active().lift_points(500, 510, 320, 240, u.data(), v.data(), z.data(), n, x.data(), y.data());
  kern::active().project_points(500, 510, 320, 240, x.data(), y.data(), z.data(), n, u2.data(), v2.data());
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(u2[i] - u[i]) < 1e-9);
    CHECK(std::abs(v2[i] - v[i]) < 1e-9);
  }
}

TEST_CASE("mask_overlap matches a naive count exactly") {
  std::mt19937 rng(105);
  std::bernoulli_distribution bit(0.3);
  for (std::size_t n : kSizes) {
    std::vector<std::uint8_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = bit(rng) ? 1 : 0;
      b[i] = bit(rng) ? 1 : 0;
    }
    std::uint64_t ni = 0, nu = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ni += a[i] & b[i];
      nu += a[i] | b[i];
    }
    std::uint64_t si, su, vi, vu;
    kern::scalar().mask_overlap(a.data(), b.data(), n, &si, &su);
    CHECK(si == ni);
    CHECK(su == nu);
    if (kern::avx2_supported()) {
      kern::avx2().mask_overlap(a.data(), b.data(), n, &vi, &vu);
      CHECK(vi == ni);
      CHECK(vu == nu);
    }
  }
}

TEST_CASE("min_dist2_update variants agree bitwise with the naive update") {
  std::mt19937 rng(106);
  for (std::size_t n : kSizes) {
    auto px = random_doubles(rng, n, 0, 100), py = random_doubles(rng, n, 0, 100);
    auto d0 = random_doubles(rng, n, 0, 5000);
    double qx = 31.5, qy = 62.25;
    std::vector<double> naive = d0, s = d0, v = d0;
    for (std::size_t i = 0; i < n; ++i) {
      double dx = px[i] - qx, dy = py[i] - qy;
      double d = dx * dx + dy * dy;
      if (d < naive[i]) naive[i] = d;
    }
    kern::scalar().min_dist2_update(px.data(), py.data(), n, qx, qy, s.data());
    CHECK(bitwise_equal(s, naive));
    if (kern::avx2_supported()) {
      kern::avx2().min_dist2_update(px.data(), py.data(), n, qx, qy, v.data());
      CHECK(bitwise_equal(v, naive));
    }
  }
}

TEST_CASE("mean_step_speed reduction equivalence") {
  std::mt19937 rng(107);
  for (std::size_t n : kSizes) {
    if (n == 0) continue;
    auto ax = random_doubles(rng, n, -1, 1), ay = random_doubles(rng, n, -1, 1),
         az = random_doubles(rng, n, -1, 1);
    auto bx = random_doubles(rng, n, -1, 1), by = random_doubles(rng, n, -1, 1),
         bz = random_doubles(rng, n, -1, 1);
    double s = kern::scalar().mean_step_speed(ax.data(), ay.data(), az.data(), bx.data(), by.data(),
                                              bz.data(), n, 8.0);
    double naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dx = bx[i] - ax[i], dy = by[i] - ay[i], dz = bz[i] - az[i];
      naive += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    naive = naive / double(n) * 8.0;
    CHECK(s == doctest::Approx(naive).epsilon(1e-13));
    if (kern::avx2_supported()) {
      double v = kern::avx2().mean_step_speed(ax.data(), ay.data(), az.data(), bx.data(), by.data(),
                                              bz.data(), n, 8.0);
      CHECK(v == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("cross_covariance reduction equivalence") {
  std::mt19937 rng(108);
  for (std::size_t n : kSizes) {
    if (n == 0) continue;
    auto fx = random_doubles(rng, n, -1, 1), fy = random_doubles(rng, n, -1, 1),
         fz = random_doubles(rng, n, -1, 1);
    auto tx = random_doubles(rng, n, -1, 1), ty = random_doubles(rng, n, -1, 1),
         tz = random_doubles(rng, n, -1, 1);
    double cf[3] = {0.1, -0.2, 0.05}, ct[3] = {-0.3, 0.02, 0.4};
    double hs[9], hv[9];
    kern::scalar().cross_covariance(fx.data(), fy.data(), fz.data(), tx.data(), ty.data(), tz.data(),
                                    n, cf, ct, hs);
    double naive[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      double f[3] = {fx[i] - cf[0], fy[i] - cf[1], fz[i] - cf[2]};
      double t[3] = {tx[i] - ct[0], ty[i] - ct[1], tz[i] - ct[2]};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) naive[r * 3 + c] += f[r] * t[c];
    }
    for (int k = 0; k < 9; ++k) CHECK(hs[k] == doctest::Approx(naive[k]).epsilon(1e-12));
    if (kern::avx2_supported()) {
      kern::avx2().cross_covariance(fx.data(), fy.data(), fz.data(), tx.data(), ty.data(), tz.data(),
                                    n, cf, ct, hv);
      for (int k = 0; k < 9; ++k) {
        CHECK(hv[k] == doctest::Approx(hs[k]).epsilon(1e-12));
      }
    }
  }
}
