#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "souschef/action_lang.hpp"
#include "souschef/arm.hpp"
#include "souschef/geometry.hpp"
#include "souschef/result.hpp"

namespace souschef::sim {

enum class ObjectKind { Ingredient, Container, Fixture };
enum class ObjectState { Whole, Cut, Mixed, Emptied };
enum class Place { IngredientArea, CuttingBoard, Bowl, Held };

const char* to_string(ObjectKind k);
const char* to_string(ObjectState s);
const char* to_string(Place p);

struct Location {
  Place place = Place::IngredientArea;
  ManipulatorId holder = ManipulatorId::Gripper;  // meaningful only when place == Held
  bool operator==(const Location& o) const {
    return place == o.place && (place != Place::Held || holder == o.holder);
  }
};

struct SimObject {
  std::string name;
  ObjectKind kind = ObjectKind::Ingredient;
  ObjectState state = ObjectState::Whole;
  Location location;
  // Pose in the ingredient area (or the fixed pose, for fixtures). Objects
  // on the board / in the bowl / held derive their effective position from
  // the fixture or arm instead.
  geom::WorldPoint position;
  std::optional<std::string> pourable_contents;
  // Tossing overwrites state with Mixed; this keeps the cutting history
  // visible to goal checks.
  bool was_cut = false;
  bool operator==(const SimObject&) const = default;
};

struct ArmState {
  ManipulatorId id = ManipulatorId::Gripper;
  geom::WorldPoint tcp;
  bool gripper_open = true;  // meaningful for the gripper arm only
  std::optional<std::string> held_object;
  std::optional<std::string> at_target;  // last successful move_to_object destination
  bool operator==(const ArmState&) const = default;
};

struct ActionError {
  enum class Code {
    UnknownObject,
    WrongArm,
    GripperBusy,
    GripperEmpty,
    NotAtTarget,
    NotOnBoard,
    BoardOccupied,
    AlreadyCut,
    NotPourable,
    EmptyBowl,
    FixtureImmovable,
  };
  Code code;
  std::string message;
  std::string offending_call;
};

const char* to_string(ActionError::Code c);

// Value-semantics snapshot of the simulated kitchen. Operations are pure
// state transformers: on error the input state is untouched.
struct WorldState {
  WorldState() {
    gripper_arm.id = ManipulatorId::Gripper;
    tool_arm.id = ManipulatorId::Tool;
    tool_arm.gripper_open = false;
  }

  std::map<std::string, SimObject> objects;
  ArmState gripper_arm;
  ArmState tool_arm;
  std::vector<std::string> bowl_contents;  // poured content entries, in order
  bool bowl_mixed = false;
  std::vector<std::string> history;  // applied calls, canonical text form

  ArmState& arm(ManipulatorId m) { return m == ManipulatorId::Gripper ? gripper_arm : tool_arm; }
  const ArmState& arm(ManipulatorId m) const {
    return m == ManipulatorId::Gripper ? gripper_arm : tool_arm;
  }
  const SimObject* find(const std::string& name) const;
  // Current pose of an object, following fixtures and holding arms.
  geom::WorldPoint effective_position(const SimObject& obj) const;
  bool board_occupied(const std::string& ignore = {}) const;
  std::vector<std::string> bowl_object_names() const;

  bool operator==(const WorldState&) const = default;
};

using ActionResult = Result<WorldState, ActionError>;

// "plate" is accepted as an alias for the bowl fixture.
std::string resolve_alias(const std::string& name);

ActionResult open_gripper(const WorldState& w, ManipulatorId arm);
ActionResult move_to_object(const WorldState& w, ManipulatorId arm, const std::string& object);
ActionResult grasp(const WorldState& w, ManipulatorId arm, const std::string& object);
ActionResult cut(const WorldState& w, ManipulatorId arm, const std::string& object);
ActionResult put(const WorldState& w, ManipulatorId arm, const std::string& object);
ActionResult pour(const WorldState& w, ManipulatorId arm, const std::string& object);
ActionResult toss(const WorldState& w, ManipulatorId arm, const std::string& object);
// Exactly cut followed by put; fails atomically.
ActionResult cut_and_put_in(const WorldState& w, ManipulatorId arm, const std::string& object);

// Names of non-fixture objects currently visible on the table (ingredient
// area), sorted. Held objects and bowl/board contents are out of view.
std::vector<std::string> sim_list_objects(const WorldState& w);

// Ground-truth boxes for visible objects: centered on the distorted
// projection of the object's position, with fixed per-kind extents.
Result<std::map<std::string, geom::PixelBox>, ActionError> sim_bounding_boxes(
    const WorldState& w, const std::vector<std::string>& names, const geom::CameraModel& camera);

struct ExecEvent {
  int call_index = 0;  // 0-based position in the program
  std::string call;
  std::string phase;
  std::string note;
  bool operator==(const ExecEvent&) const = default;
};

struct ExecutionTrace {
  std::vector<ExecEvent> events;
  bool operator==(const ExecutionTrace&) const = default;
};

struct IndexedError {
  int call_index = 0;
  ActionError error;
};

struct ExecutionResult {
  WorldState state;
  ExecutionTrace trace;
  std::optional<IndexedError> error;
  bool ok() const { return !error.has_value(); }
};

// Applies calls in order, stopping at the first error; the returned state
// reflects the successful prefix. Perception calls inside programs are
// recorded as skipped no-ops.
ExecutionResult execute_program(const WorldState& w, const lang::ActionProgram& program);

// Scene document: JSON with fixtures, objects, and a camera calibration
// reference (path resolved relative to the scene file).
struct Scene {
  WorldState state;
  geom::CameraModel camera;
  std::string id;  // source path for file-loaded scenes; doubles as image ref
};

struct ParsedScene {
  WorldState state;
  std::string calibration_ref;
};

Result<ParsedScene, DocError> parse_scene(const std::string& json_text);
Result<Scene, DocError> load_scene(const std::filesystem::path& path);

// Returns a description of the first violated structural invariant, if any
// (held-object consistency, board exclusivity, fixture placement).
std::optional<std::string> check_invariants(const WorldState& w);

}  // namespace souschef::sim
