#include "souschef/kitchen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace souschef::sim {

namespace {

constexpr geom::WorldPoint kGripperHome{0.2, -0.3, 0.3};
constexpr geom::WorldPoint kToolHome{-0.2, 0.3, 0.3};

ActionError make_error(ActionError::Code code, std::string message, std::string call) {
  return {code, std::move(message), std::move(call)};
}

std::string call_text(const char* fn, ManipulatorId arm, const std::string& object = {}) {
  std::string out = fn;
  out += "('";
  out += manipulator_token(arm);
  out += '\'';
  if (!object.empty()) {
    out += ", '";
    out += object;
    out += '\'';
  }
  out += ')';
  return out;
}

bool is_fixture(const SimObject& o) { return o.kind == ObjectKind::Fixture; }

}  // namespace

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Ingredient: return "ingredient";
    case ObjectKind::Container: return "container";
    case ObjectKind::Fixture: return "fixture";
  }
  return "?";
}

const char* to_string(ObjectState s) {
  switch (s) {
    case ObjectState::Whole: return "whole";
    case ObjectState::Cut: return "cut";
    case ObjectState::Mixed: return "mixed";
    case ObjectState::Emptied: return "emptied";
  }
  return "?";
}

const char* to_string(Place p) {
  switch (p) {
    case Place::IngredientArea: return "ingredient_area";
    case Place::CuttingBoard: return "cutting_board";
    case Place::Bowl: return "bowl";
    case Place::Held: return "held";
  }
  return "?";
}

const char* to_string(ActionError::Code c) {
  switch (c) {
    case ActionError::Code::UnknownObject: return "UnknownObject";
    case ActionError::Code::WrongArm: return "WrongArm";
    case ActionError::Code::GripperBusy: return "GripperBusy";
    case ActionError::Code::GripperEmpty: return "GripperEmpty";
    case ActionError::Code::NotAtTarget: return "NotAtTarget";
    case ActionError::Code::NotOnBoard: return "NotOnBoard";
    case ActionError::Code::BoardOccupied: return "BoardOccupied";
    case ActionError::Code::AlreadyCut: return "AlreadyCut";
    case ActionError::Code::NotPourable: return "NotPourable";
    case ActionError::Code::EmptyBowl: return "EmptyBowl";
    case ActionError::Code::FixtureImmovable: return "FixtureImmovable";
  }
  return "?";
}

std::string resolve_alias(const std::string& name) { return name == "plate" ? "bowl" : name; }

const SimObject* WorldState::find(const std::string& name) const {
  const auto it = objects.find(resolve_alias(name));
  return it == objects.end() ? nullptr : &it->second;
}

geom::WorldPoint WorldState::effective_position(const SimObject& obj) const {
  switch (obj.location.place) {
    case Place::IngredientArea: return obj.position;
    case Place::CuttingBoard: {
      if (is_fixture(obj)) return obj.position;
      const SimObject* board = find("cutting_board");
      return board ? board->position : obj.position;
    }
    case Place::Bowl: {
      if (is_fixture(obj)) return obj.position;
      const SimObject* bowl = find("bowl");
      return bowl ? bowl->position : obj.position;
    }
    case Place::Held: return arm(obj.location.holder).tcp;
  }
  return obj.position;
}

bool WorldState::board_occupied(const std::string& ignore) const {
  for (const auto& [name, obj] : objects) {
    if (is_fixture(obj) || name == ignore) continue;
    if (obj.location.place == Place::CuttingBoard) return true;
  }
  return false;
}

std::vector<std::string> WorldState::bowl_object_names() const {
  std::vector<std::string> names;
  for (const auto& [name, obj] : objects)
    if (!is_fixture(obj) && obj.location.place == Place::Bowl) names.push_back(name);
  return names;
}

ActionResult open_gripper(const WorldState& w, ManipulatorId arm) {
  const std::string call = call_text("open_gripper", arm);
  if (arm != ManipulatorId::Gripper)
    return make_error(ActionError::Code::WrongArm, "the tool arm has no gripper", call);

  const ArmState& a = w.arm(arm);
  if (a.gripper_open && !a.held_object) return w;  // idempotent

  WorldState next = w;
  ArmState& na = next.arm(arm);
  if (na.held_object) {
    const std::string held = *na.held_object;
    SimObject& obj = next.objects.at(held);
    const std::string target = na.at_target.value_or("");
    if (target == "cutting_board") {
      if (w.board_occupied(held))
        return make_error(ActionError::Code::BoardOccupied,
                          "cutting board already holds an object", call);
      obj.location = {Place::CuttingBoard};
    } else if (target == "bowl") {
      obj.location = {Place::Bowl};
      next.bowl_mixed = false;
    } else {
      obj.location = {Place::IngredientArea};
      obj.position = na.tcp;
    }
    na.held_object.reset();
  }
  na.gripper_open = true;
  next.history.push_back(call);
  return next;
}

ActionResult move_to_object(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("move_to_object", arm, object);
  const SimObject* obj = w.find(object);
  if (!obj)
    return make_error(ActionError::Code::UnknownObject, "no object named '" + object + "'", call);

  WorldState next = w;
  ArmState& na = next.arm(arm);
  na.tcp = w.effective_position(*obj);
  na.at_target = obj->name;
  next.history.push_back(call);
  return next;
}

ActionResult grasp(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("grasp", arm, object);
  if (arm != ManipulatorId::Gripper)
    return make_error(ActionError::Code::WrongArm, "only the gripper arm can grasp", call);
  const ArmState& a = w.arm(arm);
  if (!a.gripper_open || a.held_object)
    return make_error(ActionError::Code::GripperBusy,
                      a.held_object ? "gripper already holds '" + *a.held_object + "'"
                                    : "gripper is closed",
                      call);
  const std::string name = resolve_alias(object);
  if (a.at_target != name)
    return make_error(ActionError::Code::NotAtTarget,
                      "arm is not at '" + object + "' (last move target: " +
                          a.at_target.value_or("none") + ")",
                      call);
  const SimObject* obj = w.find(name);
  if (!obj)
    return make_error(ActionError::Code::UnknownObject, "no object named '" + object + "'", call);
  if (is_fixture(*obj))
    return make_error(ActionError::Code::FixtureImmovable, "'" + name + "' is a fixture", call);
  if (obj->location.place == Place::Held)
    return make_error(ActionError::Code::GripperBusy, "'" + name + "' is already held", call);

  WorldState next = w;
  ArmState& na = next.arm(arm);
  na.held_object = name;
  na.gripper_open = false;
  next.objects.at(name).location = {Place::Held, arm};
  next.history.push_back(call);
  return next;
}

ActionResult cut(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("cut", arm, object);
  const SimObject* obj = w.find(object);
  if (!obj)
    return make_error(ActionError::Code::UnknownObject, "no object named '" + object + "'", call);
  if (arm != ManipulatorId::Tool)
    return make_error(ActionError::Code::WrongArm, "only the tool arm carries the knife", call);
  if (is_fixture(*obj))
    return make_error(ActionError::Code::FixtureImmovable, "cannot cut a fixture", call);
  if (obj->location.place != Place::CuttingBoard)
    return make_error(ActionError::Code::NotOnBoard,
                      "'" + obj->name + "' is not on the cutting board", call);
  if (obj->state != ObjectState::Whole)
    return make_error(ActionError::Code::AlreadyCut,
                      "'" + obj->name + "' is not whole (state: " + to_string(obj->state) + ")",
                      call);

  WorldState next = w;
  SimObject& no = next.objects.at(obj->name);
  no.state = ObjectState::Cut;
  no.was_cut = true;
  next.history.push_back(call);
  return next;
}

ActionResult put(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("put", arm, object);
  const SimObject* obj = w.find(object);
  if (!obj)
    return make_error(ActionError::Code::UnknownObject, "no object named '" + object + "'", call);
  if (is_fixture(*obj))
    return make_error(ActionError::Code::FixtureImmovable, "cannot put a fixture", call);

  const bool held_by_arm =
      obj->location.place == Place::Held && obj->location.holder == arm;
  const bool sweep_from_board =
      arm == ManipulatorId::Tool && obj->location.place == Place::CuttingBoard;
  if (!held_by_arm && !sweep_from_board)
    return make_error(ActionError::Code::NotAtTarget,
                      "'" + obj->name + "' is neither held by this arm nor on the board for "
                      "the tool arm",
                      call);

  WorldState next = w;
  SimObject& no = next.objects.at(obj->name);
  no.location = {Place::Bowl};
  if (held_by_arm) {
    ArmState& na = next.arm(arm);
    na.held_object.reset();
    na.gripper_open = true;
  }
  next.bowl_mixed = false;  // adding un-mixes
  next.history.push_back(call);
  return next;
}

ActionResult pour(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("pour", arm, object);
  if (arm != ManipulatorId::Gripper)
    return make_error(ActionError::Code::WrongArm, "pouring needs the gripper arm", call);
  const ArmState& a = w.arm(arm);
  const std::string name = resolve_alias(object);
  if (!a.held_object || *a.held_object != name)
    return make_error(ActionError::Code::GripperEmpty,
                      a.held_object ? "gripper holds '" + *a.held_object + "', not '" + name + "'"
                                    : "gripper holds nothing",
                      call);
  const SimObject* obj = w.find(name);
  if (!obj)
    return make_error(ActionError::Code::UnknownObject, "no object named '" + object + "'", call);
  if (obj->kind != ObjectKind::Container || !obj->pourable_contents)
    return make_error(ActionError::Code::NotPourable, "'" + name + "' is not a pourable container",
                      call);
  if (obj->state == ObjectState::Emptied)
    return make_error(ActionError::Code::NotPourable, "'" + name + "' is already emptied", call);

  WorldState next = w;
  next.bowl_contents.push_back(*obj->pourable_contents);
  next.objects.at(name).state = ObjectState::Emptied;
  next.bowl_mixed = false;  // adding un-mixes
  next.history.push_back(call);
  return next;
}

ActionResult toss(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("toss", arm, object);
  if (resolve_alias(object) != "bowl")
    return make_error(ActionError::Code::UnknownObject, "toss targets the bowl", call);
  if (arm == ManipulatorId::Gripper && w.arm(arm).held_object)
    return make_error(ActionError::Code::GripperBusy,
                      "gripper must be free to toss (holds '" + *w.arm(arm).held_object + "')",
                      call);
  if (w.bowl_object_names().empty() && w.bowl_contents.empty())
    return make_error(ActionError::Code::EmptyBowl, "the bowl is empty", call);

  WorldState next = w;
  for (auto& [name, obj] : next.objects)
    if (!is_fixture(obj) && obj.location.place == Place::Bowl) obj.state = ObjectState::Mixed;
  next.bowl_mixed = true;
  next.history.push_back(call);
  return next;
}

ActionResult cut_and_put_in(const WorldState& w, ManipulatorId arm, const std::string& object) {
  const std::string call = call_text("cut_and_put_in", arm, object);
  auto after_cut = cut(w, arm, object);
  if (!after_cut.ok()) {
    ActionError e = after_cut.error();
    e.offending_call = call;
    return e;
  }
  auto after_put = put(after_cut.value(), arm, object);
  if (!after_put.ok()) {
    ActionError e = after_put.error();
    e.offending_call = call;
    return e;
  }
  return after_put;
}

std::vector<std::string> sim_list_objects(const WorldState& w) {
  std::vector<std::string> names;
  for (const auto& [name, obj] : w.objects)
    if (!is_fixture(obj) && obj.location.place == Place::IngredientArea) names.push_back(name);
  return names;  // std::map iteration is already lexicographic
}

Result<std::map<std::string, geom::PixelBox>, ActionError> sim_bounding_boxes(
    const WorldState& w, const std::vector<std::string>& names, const geom::CameraModel& camera) {
  const auto visible = sim_list_objects(w);
  std::map<std::string, geom::PixelBox> boxes;
  for (const auto& name : names) {
    if (std::find(visible.begin(), visible.end(), name) == visible.end())
      return make_error(ActionError::Code::UnknownObject,
                        "'" + name + "' is not visible on the table", "get_bounding_boxes");
    const SimObject& obj = w.objects.at(name);
    const auto projected = geom::world_to_pixel(camera, w.effective_position(obj));
    if (!projected.ok())
      return make_error(ActionError::Code::UnknownObject,
                        "'" + name + "' is not in view: " + projected.error().message,
                        "get_bounding_boxes");
    const auto raw = geom::distort_pixel(camera.distortion, projected->pixel);
    if (!raw.ok())
      return make_error(ActionError::Code::UnknownObject,
                        "'" + name + "' is not in view: " + raw.error().message,
                        "get_bounding_boxes");
    const double hw = obj.kind == ObjectKind::Container ? 28.0 : 22.0;
    const double hh = obj.kind == ObjectKind::Container ? 32.0 : 18.0;
    boxes[name] = {raw->x - hw, raw->y - hh, raw->x + hw, raw->y + hh};
  }
  return boxes;
}

namespace {

// Compact field-level diff used for trace notes.
std::string summarize_delta(const WorldState& before, const WorldState& after) {
  std::vector<std::string> parts;
  for (const auto& [name, post] : after.objects) {
    const auto it = before.objects.find(name);
    if (it == before.objects.end()) continue;
    const SimObject& pre = it->second;
    if (!(pre.location == post.location)) {
      std::string loc = to_string(post.location.place);
      if (post.location.place == Place::Held)
        loc += std::string("(") + manipulator_token(post.location.holder) + ")";
      parts.push_back(name + ": " + to_string(pre.location.place) + " -> " + loc);
    }
    if (pre.state != post.state)
      parts.push_back(name + ": " + to_string(pre.state) + " -> " + to_string(post.state));
  }
  for (ManipulatorId m : {ManipulatorId::Gripper, ManipulatorId::Tool}) {
    const ArmState& pre = before.arm(m);
    const ArmState& post = after.arm(m);
    if (pre.held_object != post.held_object)
      parts.push_back(std::string(manipulator_token(m)) + " holds " +
                      post.held_object.value_or("nothing"));
    else if (pre.gripper_open != post.gripper_open)
      parts.push_back(std::string(manipulator_token(m)) +
                      (post.gripper_open ? " gripper open" : " gripper closed"));
    if (pre.at_target != post.at_target)
      parts.push_back(std::string(manipulator_token(m)) + " at " +
                      post.at_target.value_or("none"));
  }
  if (before.bowl_contents.size() != after.bowl_contents.size())
    parts.push_back("bowl += " + after.bowl_contents.back());
  if (before.bowl_mixed != after.bowl_mixed)
    parts.push_back(after.bowl_mixed ? "bowl mixed" : "bowl unmixed");
  if (parts.empty()) return "no change";
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

}  // namespace

ExecutionResult execute_program(const WorldState& w, const lang::ActionProgram& program) {
  ExecutionResult result{w, {}, std::nullopt};
  for (std::size_t i = 0; i < program.calls.size(); ++i) {
    const lang::ApiCall& call = program.calls[i];
    const int index = static_cast<int>(i);
    const std::string text = lang::serialize_call(call);

    if (call.function == lang::ApiFunction::GetListOfObjects ||
        call.function == lang::ApiFunction::GetBoundingBoxes) {
      result.trace.events.push_back(
          {index, text, "skip", "perception runs before planning; ignored during execution"});
      continue;
    }

    if (!call.manipulator) {
      result.error = {index, make_error(ActionError::Code::WrongArm,
                                        "call is missing its manipulator argument", text)};
      return result;
    }
    const ManipulatorId arm = *call.manipulator;
    const std::string object = call.object.value_or("");

    if (call.function == lang::ApiFunction::MoveToObject) {
      auto moved = move_to_object(result.state, arm, object);
      if (!moved.ok()) {
        result.error = {index, moved.error()};
        return result;
      }
      result.trace.events.push_back({index, text, "approach", "tcp above " + object});
      result.trace.events.push_back(
          {index, text, "descend", summarize_delta(result.state, moved.value())});
      result.state = std::move(moved).value();
      continue;
    }

    ActionResult next = [&]() -> ActionResult {
      switch (call.function) {
        case lang::ApiFunction::OpenGripper: return open_gripper(result.state, arm);
        case lang::ApiFunction::Grasp: return grasp(result.state, arm, object);
        case lang::ApiFunction::Cut: return cut(result.state, arm, object);
        case lang::ApiFunction::Pour: return pour(result.state, arm, object);
        case lang::ApiFunction::Put: return put(result.state, arm, object);
        case lang::ApiFunction::Toss: return toss(result.state, arm, object);
        case lang::ApiFunction::CutAndPutIn: return cut_and_put_in(result.state, arm, object);
        default:
          return make_error(ActionError::Code::UnknownObject, "unhandled function", text);
      }
    }();
    if (!next.ok()) {
      result.error = {index, next.error()};
      return result;
    }
    result.trace.events.push_back(
        {index, text, "apply", summarize_delta(result.state, next.value())});
    result.state = std::move(next).value();
  }
  return result;
}

namespace {

DocError doc_error(DocError::Code code, std::string field, std::string message) {
  return {code, std::move(field), std::move(message)};
}

Result<geom::WorldPoint, DocError> point_from_json(const nlohmann::json& j,
                                                   const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    return doc_error(DocError::Code::Parse, field, "position must be an array of 3 reals");
  for (const auto& v : j)
    if (!v.is_number())
      return doc_error(DocError::Code::Parse, field, "position has a non-number entry");
  return geom::WorldPoint{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

bool valid_name_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Result<ParsedScene, DocError> parse_scene(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return doc_error(DocError::Code::Parse, "", "scene document is not a JSON object");

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "calibration" && key != "fixtures" && key != "objects")
      return doc_error(DocError::Code::Parse, key, "unknown key");
  }
  if (!j.contains("calibration") || !j.at("calibration").is_string())
    return doc_error(DocError::Code::Parse, "calibration", "missing calibration reference");
  if (!j.contains("fixtures") || !j.at("fixtures").is_object())
    return doc_error(DocError::Code::Parse, "fixtures", "missing fixtures object");
  if (!j.contains("objects") || !j.at("objects").is_array())
    return doc_error(DocError::Code::Parse, "objects", "missing objects array");

  ParsedScene scene;
  scene.calibration_ref = j.at("calibration").get<std::string>();
  scene.state.gripper_arm.tcp = kGripperHome;
  scene.state.tool_arm.tcp = kToolHome;

  const auto& fixtures = j.at("fixtures");
  for (auto it = fixtures.begin(); it != fixtures.end(); ++it) {
    if (it.key() != "cutting_board" && it.key() != "bowl")
      return doc_error(DocError::Code::Parse, it.key(), "unknown fixture");
  }
  for (const char* name : {"cutting_board", "bowl"}) {
    if (!fixtures.contains(name))
      return doc_error(DocError::Code::Parse, name, "missing fixture pose");
    const auto pos = point_from_json(fixtures.at(name), name);
    if (!pos.ok()) return pos.error();
    SimObject fixture;
    fixture.name = name;
    fixture.kind = ObjectKind::Fixture;
    fixture.location = {std::string(name) == "bowl" ? Place::Bowl : Place::CuttingBoard};
    fixture.position = pos.value();
    scene.state.objects.emplace(name, std::move(fixture));
  }

  for (const auto& entry : j.at("objects")) {
    if (!entry.is_object())
      return doc_error(DocError::Code::Parse, "objects", "object entry is not a JSON object");
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      const std::string& key = it.key();
      if (key != "name" && key != "kind" && key != "state" && key != "position" &&
          key != "pourable_contents")
        return doc_error(DocError::Code::Parse, key, "unknown object field");
    }
    if (!entry.contains("name") || !entry.at("name").is_string())
      return doc_error(DocError::Code::Parse, "name", "object needs a name");
    SimObject obj;
    obj.name = entry.at("name").get<std::string>();
    if (!valid_name_token(obj.name))
      return doc_error(DocError::Code::Invariant, "name",
                       "object name must be a lowercase token: '" + obj.name + "'");
    if (obj.name == "cutting_board" || obj.name == "bowl" || obj.name == "plate")
      return doc_error(DocError::Code::Duplicate, "name",
                       "'" + obj.name + "' collides with a fixture name");
    if (scene.state.objects.count(obj.name))
      return doc_error(DocError::Code::Duplicate, "name", "duplicate object '" + obj.name + "'");

    const std::string kind = entry.value("kind", "ingredient");
    if (kind == "ingredient")
      obj.kind = ObjectKind::Ingredient;
    else if (kind == "container")
      obj.kind = ObjectKind::Container;
    else
      return doc_error(DocError::Code::Parse, "kind", "unknown kind '" + kind + "'");

    const std::string state = entry.value("state", "whole");
    if (state == "whole")
      obj.state = ObjectState::Whole;
    else if (state == "cut")
      obj.state = ObjectState::Cut;
    else if (state == "mixed")
      obj.state = ObjectState::Mixed;
    else if (state == "emptied")
      obj.state = ObjectState::Emptied;
    else
      return doc_error(DocError::Code::Parse, "state", "unknown state '" + state + "'");
    obj.was_cut = obj.state == ObjectState::Cut;

    if (!entry.contains("position"))
      return doc_error(DocError::Code::Parse, "position", "object needs a position");
    const auto pos = point_from_json(entry.at("position"), "position");
    if (!pos.ok()) return pos.error();
    obj.position = pos.value();

    if (entry.contains("pourable_contents")) {
      if (!entry.at("pourable_contents").is_string())
        return doc_error(DocError::Code::Parse, "pourable_contents", "must be a string");
      obj.pourable_contents = entry.at("pourable_contents").get<std::string>();
    }
    scene.state.objects.emplace(obj.name, std::move(obj));
  }
  return scene;
}

Result<Scene, DocError> load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return doc_error(DocError::Code::Io, "", "cannot open scene file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto parsed = parse_scene(buf.str());
  if (!parsed.ok()) return parsed.error();

  std::filesystem::path calib(parsed->calibration_ref);
  if (calib.is_relative()) calib = path.parent_path() / calib;
  auto camera = geom::load_calibration(calib);
  if (!camera.ok())
    return doc_error(DocError::Code::Parse, "calibration",
                     std::string(geom::to_string(camera.error().code)) + ": " +
                         camera.error().message);
  return Scene{std::move(parsed->state), camera.value(), path.string()};
}

std::optional<std::string> check_invariants(const WorldState& w) {
  int on_board = 0;
  for (const auto& [name, obj] : w.objects) {
    if (name != obj.name) return "object map key '" + name + "' != object name";
    if (is_fixture(obj)) {
      const Place expect = name == "bowl" ? Place::Bowl : Place::CuttingBoard;
      if (obj.location.place != expect) return "fixture '" + name + "' moved";
      continue;
    }
    if (obj.location.place == Place::CuttingBoard) ++on_board;
    if (obj.location.place == Place::Held) {
      const ArmState& a = w.arm(obj.location.holder);
      if (!a.held_object || *a.held_object != name)
        return "object '" + name + "' marked held but the arm disagrees";
    }
  }
  if (on_board > 1) return "more than one object on the cutting board";
  for (ManipulatorId m : {ManipulatorId::Gripper, ManipulatorId::Tool}) {
    const ArmState& a = w.arm(m);
    if (a.held_object) {
      const SimObject* obj = w.find(*a.held_object);
      if (!obj) return "arm holds unknown object '" + *a.held_object + "'";
      if (!(obj->location == Location{Place::Held, m}))
        return "arm holds '" + *a.held_object + "' but the object is elsewhere";
      if (m == ManipulatorId::Gripper && a.gripper_open)
        return "gripper holds an object while open";
    }
  }
  return std::nullopt;
}

}  // namespace souschef::sim
