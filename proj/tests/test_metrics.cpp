#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "toolmimic/errors.hpp"
#include "toolmimic/metrics.hpp"

using namespace toolmimic;

namespace {

KeypointPair pair_at(double dist, double angle = 0.0) {
  KeypointPair p;
  p.image_id = "img";
  p.gt = Vec2(100.0, 100.0);
  p.pred = p.gt + dist * Vec2(std::cos(angle), std::sin(angle));
  return p;
}

KeypointPairSet random_set(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> d(0.0, 160.0);
  KeypointPairSet s;
  for (int i = 0; i < n; ++i) {
    KeypointPair p;
    p.image_id = "img" + std::to_string(i);
    p.gt = Vec2(d(rng), d(rng));
    p.pred = Vec2(d(rng), d(rng));
    s.pairs.push_back(p);
  }
  return s;
}

}  // namespace

TEST_CASE("average keypoint distance is the plain mean") {
  KeypointPairSet s;
  s.pairs = {pair_at(0.0)};
  CHECK(akd(s) == 0.0);

  KeypointPair fives;
  fives.gt = Vec2(0.0, 0.0);
  fives.pred = Vec2(3.0, 4.0);
  s.pairs = {fives};
  CHECK(akd(s) == 5.0);

  s.pairs = {pair_at(3.0), pair_at(4.0, 1.0), pair_at(5.0, 2.0)};
  CHECK(akd(s) == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(akd(KeypointPairSet{}), EmptySet);
}

TEST_CASE("precision counts pairs within the threshold, ties included") {
  KeypointPairSet s;
  s.pairs = {pair_at(10.0), pair_at(20.0, 2.0), pair_at(40.0, 4.0)};
  CHECK(ap_at(s, 15.0) == 1.0 / 3.0);
  CHECK(ap_at(s, 30.0) == 2.0 / 3.0);
  CHECK(ap_at(s, 45.0) == 1.0);

  KeypointPairSet edge;
  KeypointPair p;
  p.gt = Vec2(0.0, 0.0);
  p.pred = Vec2(15.0, 0.0);
  edge.pairs = {p};
  CHECK(ap_at(edge, 15.0) == 1.0);

  s.pairs = {pair_at(50.0), pair_at(60.0)};
  CHECK(ap_at(s, 45.0) == 0.0);
  CHECK_THROWS_AS(ap_at(KeypointPairSet{}, 15.0), EmptySet);
  CHECK_THROWS_AS(ap_at(s, 0.0), DegenerateConfiguration);
}

TEST_CASE("metrics match a brute force oracle on random sets") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 20; ++round) {
    KeypointPairSet s = random_set(rng, 1 + round * 7);
    double sum = 0.0;
    for (const KeypointPair& p : s.pairs)
      sum += std::sqrt((p.gt.x() - p.pred.x()) * (p.gt.x() - p.pred.x()) +
                       (p.gt.y() - p.pred.y()) * (p.gt.y() - p.pred.y()));
    CHECK(akd(s) == sum / double(s.pairs.size()));

    for (double thr : {15.0, 30.0, 45.0, 200.0}) {
      int hits = 0;
      for (const KeypointPair& p : s.pairs) {
        double dx = p.gt.x() - p.pred.x(), dy = p.gt.y() - p.pred.y();
        if (std::sqrt(dx * dx + dy * dy) <= thr) ++hits;
      }
      CHECK(ap_at(s, thr) == double(hits) / double(s.pairs.size()));
    }

    MetricsReport r = evaluate_report(s);
    CHECK(r.akd_px == akd(s));
    CHECK(r.ap15 == ap_at(s, 15.0));
    CHECK(r.ap30 == ap_at(s, 30.0));
    CHECK(r.ap45 == ap_at(s, 45.0));
  }
}

TEST_CASE("precision is monotone in the threshold and saturates") {
  std::mt19937_64 rng(23);
  KeypointPairSet s = random_set(rng, 64);
  double prev = 0.0;
  for (double thr = 5.0; thr <= 300.0; thr += 5.0) {
    double ap = ap_at(s, thr);
    CHECK(ap >= prev);
    prev = ap;
  }
  CHECK(ap_at(s, 1e9) == 1.0);
}

TEST_CASE("distance is invariant under a common pixel shift") {
  std::mt19937_64 rng(31);
  KeypointPairSet s = random_set(rng, 40);
  KeypointPairSet shifted = s;
  for (KeypointPair& p : shifted.pairs) {
    p.gt += Vec2(7.0, -3.0);
    p.pred += Vec2(7.0, -3.0);
  }
  CHECK(std::abs(akd(s) - akd(shifted)) < 1e-12);
}

TEST_CASE("reports round trip through json and format the table row") {
  std::mt19937_64 rng(37);
  MetricsReport r = evaluate_report(random_set(rng, 33));
  MetricsReport back = MetricsReport::from_json(r.to_json());
  CHECK(back.akd_px == r.akd_px);
  CHECK(back.ap15 == r.ap15);
  CHECK(back.ap30 == r.ap30);
  CHECK(back.ap45 == r.ap45);

  Json bad = r.to_json();
  bad["schema_version"] = 7;
  CHECK_THROWS_AS(MetricsReport::from_json(bad), SchemaError);

  MetricsReport row;
  row.akd_px = 18.54;
  row.ap15 = 0.5133;
  row.ap30 = 0.8578;
  row.ap45 = 0.9444;
  CHECK(row.csv_row() == "18.54,51.33,85.78,94.44");
}

TEST_CASE("keypoint pair csv files round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "toolmimic_metrics_test";
  fs::create_directories(dir);
  std::mt19937_64 rng(43);
  KeypointPairSet s = random_set(rng, 12);
  std::string path = (dir / "pairs.csv").string();
  s.write_csv(path);
  KeypointPairSet back = KeypointPairSet::from_csv(path);
  REQUIRE(back.pairs.size() == s.pairs.size());
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    CHECK(back.pairs[i].image_id == s.pairs[i].image_id);
    CHECK((back.pairs[i].gt - s.pairs[i].gt).norm() == 0.0);
    CHECK((back.pairs[i].pred - s.pairs[i].pred).norm() == 0.0);
  }
  CHECK(akd(back) == akd(s));

  std::string badp = (dir / "bad.csv").string();
  {
    std::FILE* f = std::fopen(badp.c_str(), "wb");
    std::fputs("image_id,gt_x,gt_y\nimg,1,2\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(KeypointPairSet::from_csv(badp), SchemaError);
  {
    std::FILE* f = std::fopen(badp.c_str(), "wb");
    std::fputs("image_id,gt_x,gt_y,pred_x,pred_y\nimg,1,nan,3,4\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(KeypointPairSet::from_csv(badp), SchemaError);
  CHECK_THROWS_AS(KeypointPairSet::from_csv((dir / "missing.csv").string()), IoError);
  fs::remove_all(dir);
}
