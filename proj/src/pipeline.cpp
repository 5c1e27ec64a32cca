#include "toolmimic/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <map>

#include "toolmimic/errors.hpp"
#include "toolmimic/image.hpp"

namespace toolmimic {

namespace fs = std::filesystem;

Json PortsConfig::to_json() const {
  Json j;
  j["mode"] = mode;
  j["script_path"] = script_path;
  j["remote"] = remote.to_json();
  return j;
}

PortsConfig PortsConfig::from_json(const Json& j) {
  PortsConfig c;
  c.mode = require_field(j, "mode", "ports config").get<std::string>();
  if (c.mode != "mock" && c.mode != "remote")
    throw SchemaError("ports config: mode must be \"mock\" or \"remote\", got \"" + c.mode + "\"");
  c.script_path = require_field(j, "script_path", "ports config").get<std::string>();
  if (j.contains("remote")) c.remote = RemoteVlmConfig::from_json(j["remote"]);
  return c;
}

Json PipelineConfig::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["extraction"] = extraction.to_json();
  j["correspondence"] = correspondence.to_json();
  j["plan"] = plan.to_json();
  j["gains"] = gains.to_json();
  j["chain_path"] = chain_path;
  j["ports"] = ports.to_json();
  j["seed"] = seed;
  j["settle_time"] = settle_time;
  return j;
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  if (require_field(j, "schema_version", "pipeline config").get<int>() != kSchemaVersion)
    throw SchemaError("pipeline config: unsupported schema_version");
  PipelineConfig c;
  c.extraction = ExtractionConfig::from_json(require_field(j, "extraction", "pipeline config"));
  c.correspondence =
      CorrespondenceConfig::from_json(require_field(j, "correspondence", "pipeline config"));
  c.plan = PlanConfig::from_json(require_field(j, "plan", "pipeline config"));
  c.gains = ControllerGains::from_json(require_field(j, "gains", "pipeline config"));
  c.chain_path = require_field(j, "chain_path", "pipeline config").get<std::string>();
  c.ports = PortsConfig::from_json(require_field(j, "ports", "pipeline config"));
  c.seed = require_field(j, "seed", "pipeline config").get<std::uint64_t>();
  c.settle_time = require_field(j, "settle_time", "pipeline config").get<double>();
  if (c.settle_time < 0.0) throw SchemaError("pipeline config: settle_time must be >= 0");
  return c;
}

std::string PipelineConfig::hash() const { return config_hash(to_json()); }

PipelineConfig load_pipeline_config(const std::string& path, std::string* dir_out) {
  PipelineConfig c = PipelineConfig::from_json(load_json_file(path));
  if (dir_out) *dir_out = fs::path(path).parent_path().string();
  return c;
}

std::string resolve_path(const std::string& dir, const std::string& path) {
  if (path.empty() || dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(dir) / path).string();
}

namespace {

PipelinePorts make_mock_ports(const PipelineConfig& config, const std::string& config_dir) {
  if (config.ports.script_path.empty())
    throw SchemaError("ports config: script_path is required in mock mode");
  Json s = load_json_file(resolve_path(config_dir, config.ports.script_path));
  if (require_field(s, "schema_version", "port script").get<int>() != 1)
    throw SchemaError("port script: unsupported schema_version");

  std::map<std::string, int> by_instruction;
  if (s.contains("selector"))
    for (const auto& [key, val] : s["selector"].items()) by_instruction[key] = val.get<int>();
  std::map<std::string, PixelRegion> regions;
  if (s.contains("proposer"))
    for (const auto& [role, entry] : s["proposer"].items())
      regions[role] =
          PixelRegion{vec2_from_json(require_field(entry, "center", "port script proposer"),
                                     "port script proposer center"),
                      require_field(entry, "side", "port script proposer").get<double>()};
  std::map<std::string, Vec2> matches;
  if (s.contains("correspondence"))
    for (const auto& [role, px] : s["correspondence"].items())
      matches[role] = vec2_from_json(px, "port script correspondence");
  double target_rad = s.contains("refiner_target_rad") ? s["refiner_target_rad"].get<double>() : 0.0;

  PipelinePorts ports;
  ports.selector = scripted_selector(std::move(by_instruction));
  ports.proposer = scripted_proposer(std::move(regions));
  ports.correspondence = scripted_correspondence(std::move(matches));
  ports.refiner = oracle_refiner(target_rad);
  return ports;
}

PipelinePorts make_remote_ports(const PipelineConfig& config, const std::string& config_dir) {
  RemoteVlmConfig remote = config.ports.remote;
  remote.template_dir = resolve_path(config_dir, remote.template_dir);
  remote.log_dir = resolve_path(config_dir, remote.log_dir);
  remote.apply_env_overrides();
  remote.validate();
  RemoteVlmPorts vlm = remote_vlm_client(remote);
  PipelinePorts ports;
  ports.selector = std::move(vlm.selector);
  ports.proposer = std::move(vlm.proposer);
  ports.correspondence = std::move(vlm.correspondence);
  ports.refiner = std::move(vlm.refiner);
  return ports;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void write_pose_csv(const std::string& path, const std::vector<double>& timestamps,
                    const std::vector<Pose>& poses) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fputs("step,time,x,y,z,qw,qx,qy,qz\n", f);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Eigen::Quaterniond& q = poses[i].rotation.quat();
    std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, timestamps[i],
                 poses[i].translation.x(), poses[i].translation.y(), poses[i].translation.z(),
                 q.w(), q.x(), q.y(), q.z());
  }
  if (std::fclose(f) != 0) throw IoError("cannot write " + path);
}

}  // namespace

PipelinePorts make_ports(const PipelineConfig& config, const std::string& config_dir) {
  if (config.ports.mode == "mock") return make_mock_ports(config, config_dir);
  if (config.ports.mode == "remote") return make_remote_ports(config, config_dir);
  throw SchemaError("ports config: unknown mode \"" + config.ports.mode + "\"");
}

KinematicChain load_chain(const PipelineConfig& config, const std::string& config_dir) {
  if (config.chain_path.empty()) return KinematicChain::default_chain();
  KinematicChain chain =
      KinematicChain::from_json(load_json_file(resolve_path(config_dir, config.chain_path)));
  chain.validate();
  return chain;
}

Json EeTrajectory::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["timestamps"] = timestamps;
  Json ps = Json::array();
  for (const Pose& p : poses) ps.push_back(toolmimic::to_json(p));
  j["poses"] = std::move(ps);
  return j;
}

EeTrajectory EeTrajectory::from_json(const Json& j) {
  if (require_field(j, "schema_version", "ee trajectory").get<int>() != kSchemaVersion)
    throw SchemaError("ee trajectory: unsupported schema_version");
  EeTrajectory t;
  for (const Json& v : require_field(j, "timestamps", "ee trajectory"))
    t.timestamps.push_back(v.get<double>());
  for (const Json& p : require_field(j, "poses", "ee trajectory"))
    t.poses.push_back(pose_from_json(p, "ee trajectory pose"));
  if (t.timestamps.size() != t.poses.size())
    throw SchemaError("ee trajectory: timestamps and poses disagree in length");
  return t;
}

ExtractionResult cmd_extract(const std::string& bundle_path, const PipelineConfig& config,
                             const std::string& config_dir, const std::string& out_path) {
  DemoBundle bundle = DemoBundle::from_json(load_json_file(bundle_path));
  bundle.validate();
  PipelinePorts ports = make_ports(config, config_dir);
  ExtractionResult result = run_extraction(bundle, config.extraction, *ports.selector);
  write_json_file(out_path, result.to_json(config.hash()));
  return result;
}

PlanArtifacts cmd_plan(const std::string& extraction_path, const std::string& bundle_path,
                       const std::string& scene_path, const PipelineConfig& config,
                       const std::string& config_dir, const std::string& out_dir) {
  ExtractionResult ex = ExtractionResult::from_json(load_json_file(extraction_path));
  DemoBundle bundle = DemoBundle::from_json(load_json_file(bundle_path));
  bundle.validate();
  TestScene scene = TestScene::from_json(load_json_file(scene_path));
  scene.validate();
  TargetFrame frame =
      resolve_target_frame(scene.target_frame, scene.intrinsics, scene.target_mask, scene.depth);
  PipelinePorts ports = make_ports(config, config_dir);

  TransferContext ctx;
  ctx.demo_tool_mask0 = bundle.tool_masks[0];
  ctx.demo_func_pixel0 = ex.demo_func_pixel0;
  ctx.demo_grasp_pixel0 = ex.demo_grasp_pixel0;
  ctx.task = ex.task;
  FunctionalKeypoints k_test0 =
      transfer_keypoints(ctx, scene, frame, *ports.proposer, *ports.correspondence);

  Cloud test_target = lift_masked_cloud(scene.intrinsics, scene.target_mask, scene.depth);
  Vec3 test_dims = cloud_dims(to_target_frame(test_target, frame));
  Vec3 effect = scale_effect_point(ex.effect_point, ex.demo_target_dims, test_dims);

  // Renders for the axis refiner only when someone looks at them; the mock
  // refiner ranks by offset alone.
  const FunctionalKeypoints& k_demo_tf = ex.trajectory.frames[ex.keyframes.t_function];
  RenderScene render;
  const RenderScene* render_ptr = nullptr;
  if (config.ports.mode == "remote" || !config.correspondence.render_dir.empty()) {
    Cloud test_tool = lift_masked_cloud(scene.intrinsics, scene.tool_mask, scene.depth);
    render.tool_cloud = to_target_frame(test_tool, frame);
    render.intrinsics = scene.intrinsics;
    render.target_frame = frame;
    render.demo_function_frame = image_from_mask(bundle.tool_masks[ex.keyframes.t_function]);
    render.task = ex.task;
    render_ptr = &render;
  }
  CorrespondenceConfig corr_config = config.correspondence;
  corr_config.render_dir = resolve_path(out_dir, corr_config.render_dir);
  FunctionCorrespondence corr = compose_function_correspondence(k_demo_tf, k_test0, effect,
                                                                corr_config, *ports.refiner,
                                                                render_ptr);

  std::vector<Pose> demo_poses = ex.tool_poses();
  std::vector<Pose> segment(demo_poses.begin() + ex.keyframes.t_grasp,
                            demo_poses.begin() + ex.keyframes.t_function + 1);
  std::vector<double> segment_times;
  segment_times.reserve(segment.size());
  for (int t = ex.keyframes.t_grasp; t <= ex.keyframes.t_function; ++t)
    segment_times.push_back(ex.trajectory.timestamps[t] -
                            ex.trajectory.timestamps[ex.keyframes.t_grasp]);

  Pose goal = pose_from_keypoints(corr.k_test_at_tf);
  PlanArtifacts out;
  out.correspondence = corr;
  out.tool_plan = plan_trajectory(segment, segment_times, k_test0, goal, config.plan);
  out.ee.timestamps = out.tool_plan.timestamps;
  out.ee.poses =
      tool_to_ee_trajectory(out.tool_plan.poses, scene.grasp_in_tool, scene.target_to_base);

  ensure_dir(out_dir);
  const std::string h = config.hash();
  write_json_file(join(out_dir, "correspondence.json"), corr.to_json(h));
  write_json_file(join(out_dir, "trajectory.json"), out.tool_plan.to_json(h));
  write_json_file(join(out_dir, "ee_trajectory.json"), out.ee.to_json(h));
  write_pose_csv(join(out_dir, "trajectory.csv"), out.tool_plan.timestamps, out.tool_plan.poses);
  return out;
}

SimLog cmd_simulate(const std::string& trajectory_path, const PipelineConfig& config,
                    const std::string& config_dir, const std::string& out_dir) {
  EeTrajectory traj = EeTrajectory::from_json(load_json_file(trajectory_path));
  if (traj.poses.empty()) throw SchemaError("ee trajectory: empty");
  KinematicChain chain = load_chain(config, config_dir);
  ControllerGains gains = config.gains;
  gains.validate();
  Eigen::VectorXd q0 = gains.home_vector(chain.dof());
  SimLog log = simulate_tracking(chain, gains, q0, traj.poses, traj.timestamps,
                                 traj.timestamps.back() + config.settle_time);
  ensure_dir(out_dir);
  log.write_csv(join(out_dir, "sim_log.csv"));
  Json summary = log.summary_json();
  summary["config_hash"] = config.hash();
  write_json_file(join(out_dir, "sim_summary.json"), summary);
  return log;
}

MetricsReport cmd_eval_keypoints(const std::string& pairs_csv, const std::string& out_path,
                                 const std::string& csv_path) {
  KeypointPairSet pairs = KeypointPairSet::from_csv(pairs_csv);
  MetricsReport report = evaluate_report(pairs);
  write_json_file(out_path, report.to_json());
  if (!csv_path.empty()) report.write_csv(csv_path);
  return report;
}

Fixture cmd_make_fixture(const std::string& kind, std::uint64_t seed, const std::string& out_dir) {
  Fixture fx = make_fixture(kind, seed);

  // The config the fixture's own pipeline run uses; its hash stamps every
  // file so the set is traceable to one configuration.
  PipelineConfig config;
  config.gains.q_home = fixture_home_posture();
  config.ports.mode = "mock";
  config.ports.script_path = "ports.json";
  config.seed = seed;
  const std::string h = config.hash();

  ensure_dir(out_dir);
  Json cfg_json = config.to_json();
  cfg_json["config_hash"] = h;
  write_json_file(join(out_dir, "config.json"), cfg_json);
  write_json_file(join(out_dir, "bundle.json"), fx.bundle.to_json(h));
  write_json_file(join(out_dir, "scene.json"), fx.scene.to_json(h));
  Json gt = fx.ground_truth;
  gt["config_hash"] = h;
  write_json_file(join(out_dir, "ground_truth.json"), gt);
  Json script = fx.port_script;
  script["config_hash"] = h;
  write_json_file(join(out_dir, "ports.json"), script);
  return fx;
}

}  // namespace toolmimic
