#include <doctest.h>

#include <random>

#include "toolmimic/mask.hpp"

using namespace toolmimic;

namespace {

Mask random_mask(std::mt19937& rng, int w, int h, double p) {
  Mask m(w, h);
  std::bernoulli_distribution bit(p);
  for (auto& px : m.data) px = bit(rng) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("rle round trip on random masks") {
  std::mt19937 rng(201);
  for (double p : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    Mask m = random_mask(rng, 37, 23, p);
    auto runs = rle_encode(m);
    Mask back = rle_decode(37, 23, runs);
    CHECK(back.data == m.data);
  }
}

TEST_CASE("rle leading run counts zeros") {
  Mask m(4, 1);
  m.set(0, 0, 1);
  m.set(1, 0, 1);
  auto runs = rle_encode(m);
  REQUIRE(runs.size() == 3);
  CHECK(runs[0] == 0);  // zero-length leading zero run
  CHECK(runs[1] == 2);
  CHECK(runs[2] == 2);

  Mask all_zero(3, 2);
  auto zruns = rle_encode(all_zero);
  REQUIRE(zruns.size() == 1);
  CHECK(zruns[0] == 6);
}

TEST_CASE("rle decode validates coverage") {
  CHECK_THROWS_AS(rle_decode(4, 1, {2, 3}), SchemaError);
  CHECK_THROWS_AS(rle_decode(4, 1, {2, 1}), SchemaError);
}

TEST_CASE("mask iou hand cases") {
  Mask a(4, 1), b(4, 1);
  a.set(0, 0, 1);
  a.set(1, 0, 1);
  b.set(1, 0, 1);
  b.set(2, 0, 1);
  // intersection {1}, union {0,1,2}
  CHECK(mask_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mask_iou(a, a) == 1.0);
  Mask empty(4, 1);
  CHECK(mask_iou(a, empty) == 0.0);
  CHECK(mask_iou(empty, empty) == 0.0);
  Mask other(5, 1);
  CHECK_THROWS_AS(mask_iou(a, other), LengthMismatch);
}

TEST_CASE("boundary of a filled rectangle is its perimeter") {
  Mask m(10, 8);
  for (int v = 2; v <= 5; ++v)
    for (int u = 3; u <= 7; ++u) m.set(u, v, 1);
  auto boundary = mask_boundary(m);
  // 5x4 rectangle: perimeter pixels = 2*5 + 2*4 - 4 = 14
  CHECK(boundary.size() == 14);
  for (auto [u, v] : boundary) {
    bool on_edge = u == 3 || u == 7 || v == 2 || v == 5;
    CHECK(on_edge);
  }
}

TEST_CASE("pixels on the image border are boundary pixels") {
  Mask m(3, 3);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 3; ++u) m.set(u, v, 1);
  auto boundary = mask_boundary(m);
  CHECK(boundary.size() == 8);  // all but the center pixel
}

TEST_CASE("interior holes create boundary") {
  Mask m(7, 7);
  for (int v = 1; v <= 5; ++v)
    for (int u = 1; u <= 5; ++u) m.set(u, v, 1);
  m.set(3, 3, 0);
  auto boundary = mask_boundary(m);
  // outer ring 16 + the 4 neighbors of the hole
  CHECK(boundary.size() == 20);
}

TEST_CASE("centroid and bbox") {
  Mask m(10, 10);
  for (int v = 2; v <= 4; ++v)
    for (int u = 6; u <= 8; ++u) m.set(u, v, 1);
  auto [cu, cv] = mask_centroid(m);
  CHECK(cu == doctest::Approx(7.0));
  CHECK(cv == doctest::Approx(3.0));
  MaskBBox box = mask_bbox(m);
  CHECK(box.u_min == 6);
  CHECK(box.u_max == 8);
  CHECK(box.v_min == 2);
  CHECK(box.v_max == 4);
  CHECK(box.width() == 3);
  CHECK(box.height() == 3);

  Mask empty(5, 5);
  CHECK_THROWS_AS(mask_centroid(empty), EmptySet);
  CHECK_THROWS_AS(mask_bbox(empty), EmptySet);
}

TEST_CASE("mask count") {
  Mask m(5, 5);
  CHECK(m.count() == 0);
  m.set(1, 1, 1);
  m.set(4, 4, 1);
  CHECK(m.count() == 2);
}
