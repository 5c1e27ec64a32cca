#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "toolmimic/kernels.hpp"
#include "toolmimic/pipeline.hpp"

using namespace toolmimic;

namespace {

// 0 ok, 2 input error, 3 infeasible plan, 4 controller fault.
int exit_code_for(const std::string& kind) {
  if (kind == "infeasible_problem" || kind == "max_iterations_exceeded") return 3;
  if (kind == "position_error_exceeded" || kind == "joint_limit_violation") return 4;
  return 2;
}

int fail(const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = Json{{"kind", kind}, {"message", message}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
  return exit_code_for(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional keypoint transfer: extract, plan, simulate, evaluate"};
  app.require_subcommand(1);

  std::string bundle_path, scene_path, config_path, extraction_path, trajectory_path;
  std::string out_path, out_dir, pairs_path, metrics_csv, kind = "pour", ports_mode;
  std::uint64_t seed = 0;

  CLI::App* extract = app.add_subcommand("extract", "demonstration bundle -> extraction record");
  extract->add_option("--bundle", bundle_path, "demonstration bundle JSON")->required();
  extract->add_option("--config", config_path, "pipeline config JSON")->required();
  extract->add_option("--out", out_path, "extraction record output path")->required();

  CLI::App* plan = app.add_subcommand(
      "plan", "extraction + test scene -> correspondence, tool and gripper trajectories");
  plan->add_option("--extraction", extraction_path, "extraction record JSON")->required();
  plan->add_option("--bundle", bundle_path, "demonstration bundle JSON")->required();
  plan->add_option("--scene", scene_path, "test scene JSON")->required();
  plan->add_option("--config", config_path, "pipeline config JSON")->required();
  plan->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "gripper trajectory -> tracking sim log");
  simulate->add_option("--trajectory", trajectory_path, "gripper trajectory JSON")->required();
  simulate->add_option("--config", config_path, "pipeline config JSON")->required();
  simulate->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval-keypoints", "keypoint pair CSV -> transfer metrics");
  eval->add_option("--pairs", pairs_path, "CSV of ground-truth/predicted pixels")->required();
  eval->add_option("--out", out_path, "metrics report JSON path")->required();
  eval->add_option("--csv", metrics_csv, "optional percentage-table CSV path");

  CLI::App* fixture = app.add_subcommand("make-fixture", "synthetic demo bundle + test scene");
  fixture->add_option("--kind", kind, "pour, pound, or linear");
  fixture->add_option("--seed", seed, "layout jitter seed");
  fixture->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* version = app.add_subcommand("version", "print build info");

  // Config overrides shared by the pipeline stages.
  CLI::Option* seed_opts[3];
  CLI::Option* ports_opts[3];
  CLI::App* staged[3] = {extract, plan, simulate};
  for (int i = 0; i < 3; ++i) {
    seed_opts[i] = staged[i]->add_option("--seed", seed, "override the config seed");
    ports_opts[i] = staged[i]->add_option("--ports", ports_mode, "override the port mode")
                        ->check(CLI::IsMember({"mock", "remote"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help text
    return fail("usage", e.what());
  }

  try {
    if (*version) {
      std::printf("toolmimic kernels=%s\n", kern::active().name);
      return 0;
    }
    if (*fixture) {
      cmd_make_fixture(kind, seed, out_dir);
      return 0;
    }
    if (*eval) {
      MetricsReport report = cmd_eval_keypoints(pairs_path, out_path, metrics_csv);
      std::printf("akd %.4f px  ap15 %.4f  ap30 %.4f  ap45 %.4f\n", report.akd_px, report.ap15,
                  report.ap30, report.ap45);
      return 0;
    }

    std::string config_dir;
    PipelineConfig config = load_pipeline_config(config_path, &config_dir);
    for (int i = 0; i < 3; ++i)
      if (*staged[i]) {
        if (seed_opts[i]->count() > 0) {
          config.seed = seed;
          config.extraction.seed = seed;
        }
        if (ports_opts[i]->count() > 0) config.ports.mode = ports_mode;
      }

    if (*extract) {
      ExtractionResult result = cmd_extract(bundle_path, config, config_dir, out_path);
      std::printf("keyframes grasp=%d prefunction=%d function=%d\n", result.keyframes.t_grasp,
                  result.keyframes.t_prefunction, result.keyframes.t_function);
    } else if (*plan) {
      PlanArtifacts artifacts =
          cmd_plan(extraction_path, bundle_path, scene_path, config, config_dir, out_dir);
      const ConstraintReport& r = artifacts.tool_plan.report;
      std::printf("plan converged=%d outer=%d keyframe_residual=%.3g m %.3g rad "
                  "max_speed=%.3f min_clearance=%.3g\n",
                  int(r.converged), r.outer_iterations, r.keyframe_residual_pos,
                  r.keyframe_residual_rot, r.max_speed, r.min_clearance);
    } else if (*simulate) {
      SimLog log = cmd_simulate(trajectory_path, config, config_dir, out_dir);
      std::printf("sim ticks=%zu final_error=%.6f m %.6f rad\n", log.ticks.size(),
                  log.final_position_error(), log.final_orientation_error());
    }
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const Json::exception& e) {
    return fail("schema_error", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
