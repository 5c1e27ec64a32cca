#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "toolmimic/errors.hpp"
#include "toolmimic/pipeline.hpp"

using namespace toolmimic;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(TOOLMIMIC_CLI_PATH) + " " + args;
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::unique_ptr<FunctionPointSelector> fixture_selector(const Fixture& fx) {
  std::map<std::string, int> by_instruction;
  for (const auto& [key, val] : fx.port_script["selector"].items())
    by_instruction[key] = val.get<int>();
  return scripted_selector(std::move(by_instruction));
}

}  // namespace

TEST_CASE("fixture: same seed reproduces byte-identical artifacts") {
  Fixture a = make_fixture("pour", 7);
  Fixture b = make_fixture("pour", 7);
  CHECK(a.bundle.to_json("h").dump() == b.bundle.to_json("h").dump());
  CHECK(a.scene.to_json("h").dump() == b.scene.to_json("h").dump());
  CHECK(a.ground_truth.dump() == b.ground_truth.dump());
  CHECK(a.port_script.dump() == b.port_script.dump());

  Fixture c = make_fixture("pour", 8);
  CHECK(a.bundle.to_json("h").dump() != c.bundle.to_json("h").dump());
}

TEST_CASE("fixture: unknown kind is rejected") {
  CHECK_THROWS_AS(make_fixture("stir", 0), UnknownTask);
}

TEST_CASE("fixture: bundles validate and keyframes are recoverable") {
  for (const char* kind : {"pour", "pound", "linear"}) {
    for (std::uint64_t seed : {0, 7}) {
      CAPTURE(kind);
      CAPTURE(seed);
      Fixture fx = make_fixture(kind, seed);
      fx.bundle.validate();
      fx.scene.validate();

      auto selector = fixture_selector(fx);
      ExtractionResult ex = run_extraction(fx.bundle, ExtractionConfig{}, *selector);
      int true_grasp = fx.ground_truth["keyframes"]["t_grasp"].get<int>();
      int true_function = fx.ground_truth["keyframes"]["t_function"].get<int>();
      CHECK(ex.keyframes.t_grasp == true_grasp);
      CHECK(std::abs(ex.keyframes.t_function - true_function) <= 2);
      CHECK(ex.keyframes.t_grasp < ex.keyframes.t_prefunction);
      CHECK(ex.keyframes.t_prefunction < ex.keyframes.t_function);
    }
  }
}

TEST_CASE("fixture: tracked keypoints move rigidly") {
  Fixture fx = make_fixture("linear", 3);
  std::vector<Pose> steps = transforms_from_tracks(fx.bundle.tracks);
  double worst = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t)
    for (std::size_t i = 0; i < fx.bundle.tracks[t].size(); ++i)
      worst = std::max(worst, (steps[t] * fx.bundle.tracks[t].point(i) -
                               fx.bundle.tracks[t + 1].point(i))
                                  .norm());
  CHECK(worst < 1e-8);
}

TEST_CASE("pipeline config: JSON round trip preserves the hash") {
  PipelineConfig c;
  c.gains.q_home = fixture_home_posture();
  c.ports.script_path = "ports.json";
  c.seed = 9;
  c.plan.obstacles.push_back(Aabb{Vec3(-0.1, -0.1, -0.1), Vec3(0.1, 0.1, 0.1)});

  Json j = c.to_json();
  PipelineConfig d = PipelineConfig::from_json(j);
  CHECK(d.to_json().dump() == j.dump());
  CHECK(d.hash() == c.hash());

  PipelineConfig e;
  CHECK(e.hash() != c.hash());
}

TEST_CASE("pipeline config: bad ports mode is a schema error") {
  PipelineConfig c;
  Json j = c.to_json();
  j["ports"]["mode"] = "oracle";
  CHECK_THROWS_AS(PipelineConfig::from_json(j), SchemaError);
}

TEST_CASE("ee trajectory: round trip and length check") {
  EeTrajectory t;
  t.timestamps = {0.0, 0.1};
  t.poses = {Pose{}, Pose{Rotation::exp(Vec3(0.1, 0, 0)), Vec3(0, 0, 0.01)}};
  EeTrajectory u = EeTrajectory::from_json(t.to_json("cafe"));
  CHECK(u.timestamps == t.timestamps);
  CHECK((u.poses[1].translation - t.poses[1].translation).norm() == 0.0);

  Json j = t.to_json("cafe");
  j["timestamps"].push_back(0.2);
  CHECK_THROWS_AS(EeTrajectory::from_json(j), SchemaError);
}

TEST_CASE("cli: version prints the active kernel variant") {
  CHECK(run_cli("version > /dev/null") == 0);
}

TEST_CASE("cli: missing and malformed inputs map to exit 2 with typed errors") {
  fs::path dir = fresh_dir("toolmimic_cli_errors");
  fs::path err = dir / "err.json";
  fs::path cfg = dir / "config.json";
  PipelineConfig config;
  config.ports.script_path = "ports.json";
  write_json_file(cfg.string(), config.to_json());

  CHECK(run_cli("extract --bundle " + (dir / "missing.json").string() + " --config " +
                cfg.string() + " --out " + (dir / "x.json").string() + " 2> " + err.string()) == 2);
  CHECK(load_json_file(err.string())["error"]["kind"] == "io_error");

  std::ofstream(dir / "bad.json") << "{broken";
  CHECK(run_cli("extract --bundle " + (dir / "bad.json").string() + " --config " + cfg.string() +
                " --out " + (dir / "x.json").string() + " 2> " + err.string()) == 2);
  CHECK(load_json_file(err.string())["error"]["kind"] == "schema_error");

  CHECK(run_cli("make-fixture --kind stir --out-dir " + dir.string() + " 2> " + err.string()) ==
        2);
  CHECK(load_json_file(err.string())["error"]["kind"] == "unknown_task");
}

TEST_CASE("cli: full mock pipeline run is accurate and byte-reproducible") {
  fs::path runs[2] = {fresh_dir("toolmimic_cli_run_a"), fresh_dir("toolmimic_cli_run_b")};
  for (const fs::path& dir : runs) {
    std::string d = dir.string();
    REQUIRE(run_cli("make-fixture --kind pour --seed 7 --out-dir " + d + " > /dev/null") == 0);
    REQUIRE(run_cli("extract --bundle " + d + "/bundle.json --config " + d +
                    "/config.json --out " + d + "/extraction.json > /dev/null") == 0);
    REQUIRE(run_cli("plan --extraction " + d + "/extraction.json --bundle " + d +
                    "/bundle.json --scene " + d + "/scene.json --config " + d +
                    "/config.json --out-dir " + d + "/out > /dev/null") == 0);
    REQUIRE(run_cli("simulate --trajectory " + d + "/out/ee_trajectory.json --config " + d +
                    "/config.json --out-dir " + d + "/out > /dev/null") == 0);
  }

  Json summary = load_json_file((runs[0] / "out/sim_summary.json").string());
  CHECK(summary["final_position_error_m"].get<double>() < 0.005);
  CHECK(summary["config_hash"] ==
        load_json_file((runs[0] / "ground_truth.json").string())["config_hash"]);

  for (const char* name : {"bundle.json", "scene.json", "ground_truth.json", "ports.json",
                           "config.json", "extraction.json", "out/correspondence.json",
                           "out/trajectory.json", "out/trajectory.csv", "out/ee_trajectory.json",
                           "out/sim_log.csv", "out/sim_summary.json"}) {
    CAPTURE(name);
    CHECK(slurp(runs[0] / name) == slurp(runs[1] / name));
  }
}

TEST_CASE("cli: infeasible plans exit 3, controller faults exit 4") {
  fs::path dir = fresh_dir("toolmimic_cli_codes");
  std::string d = dir.string();
  fs::path err = dir / "err.json";
  REQUIRE(run_cli("make-fixture --kind pour --seed 7 --out-dir " + d + " > /dev/null") == 0);
  REQUIRE(run_cli("extract --bundle " + d + "/bundle.json --config " + d + "/config.json --out " +
                  d + "/extraction.json > /dev/null") == 0);
  REQUIRE(run_cli("plan --extraction " + d + "/extraction.json --bundle " + d +
                  "/bundle.json --scene " + d + "/scene.json --config " + d +
                  "/config.json --out-dir " + d + "/out > /dev/null") == 0);

  Json slow = load_pipeline_config(d + "/config.json").to_json();
  slow["plan"]["v_max"] = 1e-6;
  write_json_file(d + "/config_slow.json", slow);
  CHECK(run_cli("plan --extraction " + d + "/extraction.json --bundle " + d +
                "/bundle.json --scene " + d + "/scene.json --config " + d +
                "/config_slow.json --out-dir " + d + "/out_slow 2> " + err.string()) == 3);
  CHECK(load_json_file(err.string())["error"]["kind"] == "infeasible_problem");

  // An all-zeros home posture puts fk(q0) ~1 m from the trajectory start.
  Json zero_home = load_pipeline_config(d + "/config.json").to_json();
  zero_home["gains"]["q_home"] = std::vector<double>(7, 0.0);
  write_json_file(d + "/config_zero.json", zero_home);
  CHECK(run_cli("simulate --trajectory " + d + "/out/ee_trajectory.json --config " + d +
                "/config_zero.json --out-dir " + d + "/out_zero 2> " + err.string()) == 4);
  CHECK(load_json_file(err.string())["error"]["kind"] == "position_error_exceeded");
}

TEST_CASE("cli: eval-keypoints reports the standard metrics") {
  fs::path dir = fresh_dir("toolmimic_cli_eval");
  std::ofstream(dir / "pairs.csv") << "image_id,gt_x,gt_y,pred_x,pred_y\n"
                                   << "a,10,10,12,10\n"
                                   << "b,50,50,50,90\n";
  REQUIRE(run_cli("eval-keypoints --pairs " + (dir / "pairs.csv").string() + " --out " +
                  (dir / "metrics.json").string() + " > /dev/null") == 0);
  Json m = load_json_file((dir / "metrics.json").string());
  CHECK(m["akd_px"].get<double>() == doctest::Approx(21.0));
  CHECK(m["ap15"].get<double>() == doctest::Approx(0.5));
  CHECK(m["ap45"].get<double>() == doctest::Approx(1.0));
}
