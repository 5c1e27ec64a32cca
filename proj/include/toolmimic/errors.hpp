#pragma once

#include <stdexcept>
#include <string>

namespace toolmimic {

// Base for all typed failures. `kind()` is a stable machine-readable tag that
// the CLI maps onto exit codes and the stderr error record.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

#define TOOLMIMIC_DEFINE_ERROR(Name, tag)                     \
  class Name : public Error {                                 \
  public:                                                     \
    explicit Name(const std::string& what) : Error(tag, what) {} \
  }

// geometry
TOOLMIMIC_DEFINE_ERROR(DegenerateConfiguration, "degenerate_configuration");
TOOLMIMIC_DEFINE_ERROR(PointBehindCamera, "point_behind_camera");
TOOLMIMIC_DEFINE_ERROR(NonPositiveDepth, "non_positive_depth");

// keypoint model
TOOLMIMIC_DEFINE_ERROR(EmptyCloud, "empty_cloud");
TOOLMIMIC_DEFINE_ERROR(DegenerateKeypoints, "degenerate_keypoints");
TOOLMIMIC_DEFINE_ERROR(NonPositiveDimension, "non_positive_dimension");
TOOLMIMIC_DEFINE_ERROR(IndexOutOfRange, "index_out_of_range");

// demo extraction
TOOLMIMIC_DEFINE_ERROR(MaskTooSmall, "mask_too_small");
TOOLMIMIC_DEFINE_ERROR(BoundaryTooSmall, "boundary_too_small");
TOOLMIMIC_DEFINE_ERROR(NoChangeDetected, "no_change_detected");
TOOLMIMIC_DEFINE_ERROR(NoGraspContact, "no_grasp_contact");
TOOLMIMIC_DEFINE_ERROR(NoPrefunctionFrame, "no_prefunction_frame");
TOOLMIMIC_DEFINE_ERROR(BadKeyframeOrder, "bad_keyframe_order");
TOOLMIMIC_DEFINE_ERROR(SelectorOutOfRange, "selector_out_of_range");
TOOLMIMIC_DEFINE_ERROR(MissingDepth, "missing_depth");

// correspondence
TOOLMIMIC_DEFINE_ERROR(RegionOutsideMask, "region_outside_mask");
TOOLMIMIC_DEFINE_ERROR(CorrespondenceFailed, "correspondence_failed");
TOOLMIMIC_DEFINE_ERROR(RefinerOutOfRange, "refiner_out_of_range");

// trajectory
TOOLMIMIC_DEFINE_ERROR(DegenerateProjection, "degenerate_projection");
TOOLMIMIC_DEFINE_ERROR(InfeasibleProblem, "infeasible_problem");

// controller / sim
TOOLMIMIC_DEFINE_ERROR(PositionErrorExceeded, "position_error_exceeded");
TOOLMIMIC_DEFINE_ERROR(JointLimitViolation, "joint_limit_violation");

// metrics
TOOLMIMIC_DEFINE_ERROR(EmptySet, "empty_set");
TOOLMIMIC_DEFINE_ERROR(LengthMismatch, "length_mismatch");

// ports
TOOLMIMIC_DEFINE_ERROR(UnknownTask, "unknown_task");
TOOLMIMIC_DEFINE_ERROR(TransportError, "transport_error");
TOOLMIMIC_DEFINE_ERROR(MalformedResponse, "malformed_response");
TOOLMIMIC_DEFINE_ERROR(OutOfRangeSelection, "out_of_range_selection");

// I/O and schemas
TOOLMIMIC_DEFINE_ERROR(SchemaError, "schema_error");
TOOLMIMIC_DEFINE_ERROR(IoError, "io_error");

#undef TOOLMIMIC_DEFINE_ERROR

}  // namespace toolmimic
