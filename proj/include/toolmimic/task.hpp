#pragma once

#include <string>

namespace toolmimic {

/// Language description of a demonstrated manipulation: the instruction plus
/// the grasped (tool) and unattached (target) object names.
struct TaskTriple {
  std::string instruction;
  std::string object_grasped;
  std::string object_unattached;
};

}  // namespace toolmimic
