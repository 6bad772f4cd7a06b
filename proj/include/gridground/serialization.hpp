#pragma once

#include <json.hpp>

#include "gridground/world.hpp"

namespace gridground {

using Json = nlohmann::json;

void to_json(Json& j, const Vec3& v);
void from_json(const Json& j, Vec3& v);
void to_json(Json& j, const Cell& c);
void from_json(const Json& j, Cell& c);
void to_json(Json& j, const GridSpec& g);
void from_json(const Json& j, GridSpec& g);
void to_json(Json& j, const ObjectInstance& o);
void from_json(const Json& j, ObjectInstance& o);
void to_json(Json& j, const SceneState& s);
void from_json(const Json& j, SceneState& s);

}  // namespace gridground
