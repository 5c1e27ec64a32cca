#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toolmimic/geometry.hpp"
#include "toolmimic/image.hpp"
#include "toolmimic/mask.hpp"
#include "toolmimic/task.hpp"

namespace toolmimic {

// Perception port interfaces. The pipeline's geometric core depends only on
// these; implementations are either deterministic mocks (tests, offline runs)
// or a remote vision-language model client.

struct FunctionPointQuery {
  PortImage annotated_frame;          // pre-function frame with candidate markers
  std::vector<Vec2> candidate_pixels;
  TaskTriple task;
};

/// Chooses one of the marked boundary candidates as the function point.
class FunctionPointSelector {
public:
  virtual ~FunctionPointSelector() = default;
  /// Returns a candidate index; the caller range-checks it.
  virtual int select_function_point(const FunctionPointQuery& query) = 0;
};

struct PixelRegion {
  Vec2 center{0.0, 0.0};
  double side = 0.0;  // square side length, pixels
};

struct RegionQuery {
  PortImage demo_marked_frame;  // demo initial frame with the demo keypoint marked
  PortImage test_frame;
  const Mask* test_tool_mask = nullptr;
  Vec2 demo_pixel{0.0, 0.0};
  std::string role;  // "func" or "grasp"
  TaskTriple task;
};

/// Proposes a coarse search region on the test frame for one keypoint role.
/// The returned center must lie inside the image bounds.
class RegionProposer {
public:
  virtual ~RegionProposer() = default;
  virtual PixelRegion propose_region(const RegionQuery& query) = 0;
};

struct CorrespondenceQuery {
  PortImage demo_marked_frame;
  PortImage test_frame;
  Vec2 demo_pixel{0.0, 0.0};
  PixelRegion region;  // search window on the test frame
  std::string role;
};

/// Pixel-level match of the demo keypoint inside the search region.
/// Returns nullopt when no match is found; a returned pixel lies inside the
/// search region.
class DenseCorrespondence {
public:
  virtual ~DenseCorrespondence() = default;
  virtual std::optional<Vec2> correspond(const CorrespondenceQuery& query) = 0;
};

struct AxisCandidate {
  double offset_rad = 0.0;
  PortImage render;  // may be empty when no render context was supplied
};

struct AxisQuery {
  PortImage demo_function_frame;
  std::vector<AxisCandidate> candidates;
  TaskTriple task;
};

/// Chooses among rendered axis-offset candidates.
class AxisRefiner {
public:
  virtual ~AxisRefiner() = default;
  /// Returns a candidate index; the caller range-checks it.
  virtual int select_axis(const AxisQuery& query) = 0;
};

// Deterministic mocks.

/// Selector scripted per task instruction. Throws UnknownTask for an
/// instruction without a scripted answer.
std::unique_ptr<FunctionPointSelector> scripted_selector(std::map<std::string, int> by_instruction);

/// Proposer scripted per keypoint role ("func"/"grasp"). Throws UnknownTask
/// for an unscripted role.
std::unique_ptr<RegionProposer> scripted_proposer(std::map<std::string, PixelRegion> by_role);

/// Correspondence scripted per role. Throws UnknownTask for an unscripted
/// role. A scripted pixel outside the query region reports no match.
std::unique_ptr<DenseCorrespondence> scripted_correspondence(std::map<std::string, Vec2> by_role);

/// Correspondence that returns the center of the search region.
std::unique_ptr<DenseCorrespondence> region_center_correspondence();

/// Refiner selecting the candidate offset nearest to `target_angle_rad`.
/// Distance ties (to 1e-12) resolve to the smaller-magnitude offset.
std::unique_ptr<AxisRefiner> oracle_refiner(double target_angle_rad);

}  // namespace toolmimic
