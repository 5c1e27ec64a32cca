#include "toolmimic/ports.hpp"

#include <cmath>

#include "toolmimic/errors.hpp"

namespace toolmimic {

namespace {

class ScriptedSelector final : public FunctionPointSelector {
public:
  explicit ScriptedSelector(std::map<std::string, int> script) : script_(std::move(script)) {}
  int select_function_point(const FunctionPointQuery& query) override {
    auto it = script_.find(query.task.instruction);
    if (it == script_.end()) {
      throw UnknownTask("no scripted function point for instruction '" + query.task.instruction + "'");
    }
    return it->second;
  }

private:
  std::map<std::string, int> script_;
};

class ScriptedProposer final : public RegionProposer {
public:
  explicit ScriptedProposer(std::map<std::string, PixelRegion> script) : script_(std::move(script)) {}
  PixelRegion propose_region(const RegionQuery& query) override {
    auto it = script_.find(query.role);
    if (it == script_.end()) {
      throw UnknownTask("no scripted region for role '" + query.role + "'");
    }
    return it->second;
  }

private:
  std::map<std::string, PixelRegion> script_;
};

bool inside_region(const Vec2& px, const PixelRegion& region) {
  double half = 0.5 * region.side;
  return std::abs(px.x() - region.center.x()) <= half && std::abs(px.y() - region.center.y()) <= half;
}

class ScriptedCorrespondence final : public DenseCorrespondence {
public:
  explicit ScriptedCorrespondence(std::map<std::string, Vec2> script) : script_(std::move(script)) {}
  std::optional<Vec2> correspond(const CorrespondenceQuery& query) override {
    auto it = script_.find(query.role);
    if (it == script_.end()) {
      throw UnknownTask("no scripted match for role '" + query.role + "'");
    }
    if (!inside_region(it->second, query.region)) return std::nullopt;
    return it->second;
  }

private:
  std::map<std::string, Vec2> script_;
};

class RegionCenterCorrespondence final : public DenseCorrespondence {
public:
  std::optional<Vec2> correspond(const CorrespondenceQuery& query) override {
    return query.region.center;
  }
};

class OracleRefiner final : public AxisRefiner {
public:
  explicit OracleRefiner(double target) : target_(target) {}
  int select_axis(const AxisQuery& query) override {
    if (query.candidates.empty()) throw OutOfRangeSelection("axis query carries no candidates");
    int best = 0;
    double best_dist = std::abs(query.candidates[0].offset_rad - target_);
    for (int i = 1; i < int(query.candidates.size()); ++i) {
      double dist = std::abs(query.candidates[i].offset_rad - target_);
      if (dist < best_dist - 1e-12) {
        best = i;
        best_dist = dist;
      } else if (std::abs(dist - best_dist) <= 1e-12 &&
                 std::abs(query.candidates[i].offset_rad) < std::abs(query.candidates[best].offset_rad)) {
        best = i;
      }
    }
    return best;
  }

private:
  double target_;
};

}  // namespace

std::unique_ptr<FunctionPointSelector> scripted_selector(std::map<std::string, int> by_instruction) {
  return std::make_unique<ScriptedSelector>(std::move(by_instruction));
}

std::unique_ptr<RegionProposer> scripted_proposer(std::map<std::string, PixelRegion> by_role) {
  return std::make_unique<ScriptedProposer>(std::move(by_role));
}

std::unique_ptr<DenseCorrespondence> scripted_correspondence(std::map<std::string, Vec2> by_role) {
  return std::make_unique<ScriptedCorrespondence>(std::move(by_role));
}

std::unique_ptr<DenseCorrespondence> region_center_correspondence() {
  return std::make_unique<RegionCenterCorrespondence>();
}

std::unique_ptr<AxisRefiner> oracle_refiner(double target_angle_rad) {
  return std::make_unique<OracleRefiner>(target_angle_rad);
}

}  // namespace toolmimic
