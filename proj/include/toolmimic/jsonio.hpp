#pragma once

#include <json.hpp>
#include <string>

#include "toolmimic/geometry.hpp"
#include "toolmimic/mask.hpp"
#include "toolmimic/task.hpp"

namespace toolmimic {

using Json = nlohmann::json;

// JSON encodings shared by every file format:
//   Vec3            -> [x, y, z]
//   Vec2            -> [u, v]
//   Rotation        -> [w, x, y, z] (unit, w >= 0)
//   Pose            -> {"quat": [w,x,y,z], "pos": [x,y,z]}
//   Mask            -> {"width", "height", "runs"} (row-major RLE, zero run first)
//   TaskTriple      -> {"instruction", "object_grasped", "object_unattached"}

Json to_json(const Vec3& v);
Json to_json(const Vec2& v);
Json to_json(const Rotation& r);
Json to_json(const Pose& p);
Json to_json(const Mask& m);
Json to_json(const TaskTriple& t);

Vec3 vec3_from_json(const Json& j, const std::string& what);
Vec2 vec2_from_json(const Json& j, const std::string& what);
Rotation rotation_from_json(const Json& j, const std::string& what);
Pose pose_from_json(const Json& j, const std::string& what);
Mask mask_from_json(const Json& j, const std::string& what);
TaskTriple task_from_json(const Json& j, const std::string& what);

/// Field access that raises SchemaError naming the missing/ill-typed field.
const Json& require_field(const Json& j, const std::string& key, const std::string& what);

/// FNV-1a 64-bit hash of the canonical (sorted-key) dump, as 16 hex chars.
/// Stamped into every output file as "config_hash".
std::string config_hash(const Json& config);

/// Reads and parses a JSON file. IoError when unreadable, SchemaError when
/// unparseable.
Json load_json_file(const std::string& path);

/// Serializes with 1-space indent and sorted keys; output is byte-stable for
/// equal documents. Throws IoError.
void write_json_file(const std::string& path, const Json& j);

}  // namespace toolmimic
