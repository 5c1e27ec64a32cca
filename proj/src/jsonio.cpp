#include "toolmimic/jsonio.hpp"

#include <cstdint>
#include <fstream>

namespace toolmimic {

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Json to_json(const Rotation& r) {
  const auto& q = r.quat();
  return Json::array({q.w(), q.x(), q.y(), q.z()});
}

Json to_json(const Pose& p) {
  return Json{{"quat", to_json(p.rotation)}, {"pos", to_json(p.translation)}};
}

Json to_json(const Mask& m) {
  return Json{{"width", m.width}, {"height", m.height}, {"runs", rle_encode(m)}};
}

Json to_json(const TaskTriple& t) {
  return Json{{"instruction", t.instruction},
              {"object_grasped", t.object_grasped},
              {"object_unattached", t.object_unattached}};
}

namespace {

void expect_array(const Json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) {
    throw SchemaError(what + ": expected an array of " + std::to_string(n) + " numbers");
  }
  for (const auto& e : j) {
    if (!e.is_number()) throw SchemaError(what + ": expected numeric entries");
  }
}

}  // namespace

Vec3 vec3_from_json(const Json& j, const std::string& what) {
  expect_array(j, 3, what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec2 vec2_from_json(const Json& j, const std::string& what) {
  expect_array(j, 2, what);
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Rotation rotation_from_json(const Json& j, const std::string& what) {
  expect_array(j, 4, what);
  double w = j[0].get<double>(), x = j[1].get<double>(), y = j[2].get<double>(), z = j[3].get<double>();
  double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 1e-9)) throw SchemaError(what + ": quaternion has near-zero norm");
  return Rotation(w, x, y, z);
}

Pose pose_from_json(const Json& j, const std::string& what) {
  return Pose{rotation_from_json(require_field(j, "quat", what), what + ".quat"),
              vec3_from_json(require_field(j, "pos", what), what + ".pos")};
}

Mask mask_from_json(const Json& j, const std::string& what) {
  const Json& jw = require_field(j, "width", what);
  const Json& jh = require_field(j, "height", what);
  const Json& jr = require_field(j, "runs", what);
  if (!jw.is_number_integer() || !jh.is_number_integer() || !jr.is_array()) {
    throw SchemaError(what + ": mask needs integer width/height and a runs array");
  }
  std::vector<std::uint64_t> runs;
  runs.reserve(jr.size());
  for (const auto& e : jr) {
    if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
      throw SchemaError(what + ": mask runs must be non-negative integers");
    }
    runs.push_back(e.get<std::uint64_t>());
  }
  return rle_decode(jw.get<int>(), jh.get<int>(), runs);
}

TaskTriple task_from_json(const Json& j, const std::string& what) {
  TaskTriple t;
  for (auto* field : {&t.instruction, &t.object_grasped, &t.object_unattached}) {
    const char* key = field == &t.instruction     ? "instruction"
                      : field == &t.object_grasped ? "object_grasped"
                                                   : "object_unattached";
    const Json& val = require_field(j, key, what);
    if (!val.is_string()) throw SchemaError(what + "." + key + ": expected a string");
    *field = val.get<std::string>();
  }
  return t;
}

const Json& require_field(const Json& j, const std::string& key, const std::string& what) {
  if (!j.is_object()) throw SchemaError(what + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(what + ": missing field '" + key + "'");
  return *it;
}

std::string config_hash(const Json& config) {
  std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("invalid JSON in " + path);
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(1) << "\n";
  if (!out) throw IoError("short write to " + path);
}

}  // namespace toolmimic
