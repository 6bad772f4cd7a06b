#include "gridground/serialization.hpp"

#include "gridground/errors.hpp"

namespace gridground {

void to_json(Json& j, const Vec3& v) { j = Json::array({v.x, v.y, v.z}); }
void from_json(const Json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::FormatError, "expected [x, y, z]");
  v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(Json& j, const Cell& c) { j = Json::array({c.x, c.y, c.z}); }
void from_json(const Json& j, Cell& c) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::FormatError, "expected [x, y, z] cell");
  c = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

void to_json(Json& j, const GridSpec& g) {
  j = Json{{"width", g.width}, {"height", g.height}, {"layers", g.layers}, {"cell_size", g.cell_size}, {"origin", g.origin}};
}
void from_json(const Json& j, GridSpec& g) {
  g.width = j.at("width").get<int>();
  g.height = j.at("height").get<int>();
  g.layers = j.at("layers").get<int>();
  g.cell_size = j.value("cell_size", 0.1);
  g.origin = j.contains("origin") ? j.at("origin").get<Vec3>() : Vec3{};
  g.validate();
}

void to_json(Json& j, const ObjectInstance& o) {
  j = Json{{"id", o.id}, {"noun", o.noun}, {"attributes", o.attributes}, {"position", o.position}, {"cell", o.cell}};
}
void from_json(const Json& j, ObjectInstance& o) {
  o.id = j.at("id").get<std::string>();
  o.noun = j.at("noun").get<std::string>();
  o.attributes = j.value("attributes", std::vector<std::string>{});
  o.position = j.at("position").get<Vec3>();
  o.cell = j.at("cell").get<Cell>();
}

void to_json(Json& j, const SceneState& s) {
  j = Json{{"grid", s.grid}, {"objects", s.objects}};
  j["held"] = s.held ? Json(*s.held) : Json(nullptr);
}
void from_json(const Json& j, SceneState& s) {
  s.grid = j.at("grid").get<GridSpec>();
  s.objects = j.at("objects").get<std::vector<ObjectInstance>>();
  s.held.reset();
  if (j.contains("held") && !j.at("held").is_null()) s.held = j.at("held").get<std::string>();
}

}  // namespace gridground
