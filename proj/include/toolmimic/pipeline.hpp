#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toolmimic/bundle.hpp"
#include "toolmimic/controller.hpp"
#include "toolmimic/correspondence.hpp"
#include "toolmimic/extraction.hpp"
#include "toolmimic/fixture.hpp"
#include "toolmimic/metrics.hpp"
#include "toolmimic/trajectory.hpp"
#include "toolmimic/vlm_client.hpp"

namespace toolmimic {

// Stage orchestration behind the CLI. Each cmd_* function is a pure function
// of (input files, config) to output files; the CLI adds only flag parsing
// and the error-to-exit-code mapping.

/// Perception port selection: deterministic mocks driven by a script file, or
/// the remote VLM client.
struct PortsConfig {
  std::string mode = "mock";  // "mock" | "remote"
  std::string script_path;    // mock: port script JSON, relative to the config file
  RemoteVlmConfig remote;     // remote: endpoint settings

  Json to_json() const;
  static PortsConfig from_json(const Json& j);
};

struct PipelineConfig {
  static constexpr int kSchemaVersion = 1;

  ExtractionConfig extraction;
  CorrespondenceConfig correspondence;
  PlanConfig plan;
  ControllerGains gains;
  std::string chain_path;    // kinematic chain JSON; empty selects the built-in 7-DoF arm
  PortsConfig ports;
  std::uint64_t seed = 0;
  double settle_time = 1.6;  // s the sim holds the last command past the trajectory end

  Json to_json() const;
  static PipelineConfig from_json(const Json& j);

  /// The hash stamped into every file this config produces.
  std::string hash() const;
};

/// Reads a pipeline config file. `dir_out`, when non-null, receives the
/// file's directory for resolving the relative paths the config contains
/// (script_path, chain_path), so a config directory relocates as a unit.
PipelineConfig load_pipeline_config(const std::string& path, std::string* dir_out = nullptr);

/// `path` resolved against `dir` unless absolute or `dir` is empty.
std::string resolve_path(const std::string& dir, const std::string& path);

struct PipelinePorts {
  std::unique_ptr<FunctionPointSelector> selector;
  std::unique_ptr<RegionProposer> proposer;
  std::unique_ptr<DenseCorrespondence> correspondence;
  std::unique_ptr<AxisRefiner> refiner;
};

/// Builds the four perception ports. Mock mode loads the port script
/// (SchemaError when script_path is unset); remote mode builds the VLM
/// client after applying environment overrides. SchemaError for an unknown
/// mode.
PipelinePorts make_ports(const PipelineConfig& config, const std::string& config_dir);

/// The chain named by the config, or the built-in arm when chain_path is
/// empty.
KinematicChain load_chain(const PipelineConfig& config, const std::string& config_dir);

/// Timed gripper targets in the robot base frame; what the simulate stage
/// consumes.
struct EeTrajectory {
  static constexpr int kSchemaVersion = 1;

  std::vector<double> timestamps;  // seconds, strictly increasing
  std::vector<Pose> poses;

  Json to_json(const std::string& cfg_hash) const;
  static EeTrajectory from_json(const Json& j);
};

/// Extraction stage: demonstration bundle in, extraction record at out_path.
ExtractionResult cmd_extract(const std::string& bundle_path, const PipelineConfig& config,
                             const std::string& config_dir, const std::string& out_path);

struct PlanArtifacts {
  FunctionCorrespondence correspondence;
  TrajectoryPlan tool_plan;      // target frame
  EeTrajectory ee;               // robot base frame
};

/// Transfer + correspondence + synthesis: writes correspondence.json,
/// trajectory.json, ee_trajectory.json and trajectory.csv under out_dir. The
/// demo segment is the extraction's tool poses from the grasp through the
/// function keyframe; the effect point is rescaled by the demo/test target
/// dimensions before composition.
PlanArtifacts cmd_plan(const std::string& extraction_path, const std::string& bundle_path,
                       const std::string& scene_path, const PipelineConfig& config,
                       const std::string& config_dir, const std::string& out_dir);

/// Tracking simulation of a planned gripper trajectory: writes sim_log.csv
/// and sim_summary.json under out_dir. The start posture is the gains' home
/// vector.
SimLog cmd_simulate(const std::string& trajectory_path, const PipelineConfig& config,
                    const std::string& config_dir, const std::string& out_dir);

/// Keypoint-transfer metrics over a ground-truth/prediction pair CSV; writes
/// the report JSON to out_path and, when csv_path is nonempty, the two-line
/// percentage table.
MetricsReport cmd_eval_keypoints(const std::string& pairs_csv, const std::string& out_path,
                                 const std::string& csv_path);

/// Synthetic demo generator: writes bundle.json, scene.json,
/// ground_truth.json, ports.json and a ready-to-run config.json under
/// out_dir.
Fixture cmd_make_fixture(const std::string& kind, std::uint64_t seed, const std::string& out_dir);

}  // namespace toolmimic
