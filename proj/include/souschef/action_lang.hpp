#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "souschef/arm.hpp"
#include "souschef/result.hpp"

namespace souschef::lang {

// The ten whitelisted motion-API functions. Nothing else can be expressed
// as a call, by construction.
enum class ApiFunction {
  OpenGripper,
  MoveToObject,
  Grasp,
  Cut,
  Pour,
  Put,
  Toss,
  CutAndPutIn,
  GetListOfObjects,
  GetBoundingBoxes,
};

const char* function_name(ApiFunction f);
std::optional<ApiFunction> function_from_name(std::string_view name);

// Argument shape per function: how many string arguments are accepted and
// whether the first one names a manipulator.
struct ApiSignature {
  int min_args;
  int max_args;
  bool manipulator_first;
};
ApiSignature signature(ApiFunction f);

struct SourceSpan {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  bool operator==(const SourceSpan&) const = default;
};

struct ApiCall {
  ApiFunction function = ApiFunction::OpenGripper;
  std::optional<ManipulatorId> manipulator;
  std::optional<std::string> object;
  SourceSpan span{};

  // Spans are diagnostics only; two calls are the same call if they agree
  // on function and arguments.
  bool operator==(const ApiCall& o) const {
    return function == o.function && manipulator == o.manipulator && object == o.object;
  }
};

// Straight-line program: an ordered list of whitelisted calls. The parser
// never produces an empty one.
struct ActionProgram {
  std::vector<ApiCall> calls;
  bool operator==(const ActionProgram&) const = default;
};

// Step plan extracted from between the "[start of plan]" / "[end of plan]"
// tag pair.
struct PlanDocument {
  std::vector<std::string> steps;
  std::string raw;
  bool operator==(const PlanDocument& o) const { return steps == o.steps; }
};

struct ValidationError {
  enum class Code {
    MissingTags,
    DuplicateTags,
    UnknownFunction,
    BadArity,
    BadArgumentType,
    UnsupportedConstruct,
    UnknownObjectName,
    SyntaxError,
  };
  Code code;
  SourceSpan location;
  std::string message;
};

const char* to_string(ValidationError::Code c);

// Extracts the plan body between exactly one start tag and one end tag.
// Steps are the nonblank lines in between.
Result<PlanDocument, ValidationError> parse_plan(std::string_view text);

// Parses generated call-sequence code into a typed program without ever
// executing anything. Grammar: an optional single header line ending in a
// colon, then one call per line — identifier '(' quoted args ')' — with
// '#' comments and blank lines tolerated and indentation ignored. Any
// control flow, assignment, or import is rejected.
Result<ActionProgram, ValidationError> parse_program(std::string_view source);

// Canonical text form: one call per line, single-quoted arguments, no
// header. parse_program(serialize_program(p)) == p for valid programs.
std::string serialize_call(const ApiCall& call);
std::string serialize_program(const ActionProgram& program);

// Static scene precheck: every object token must name a known object or
// one of the fixtures. Dynamic preconditions stay with the simulator.
struct SceneCheck {
  std::vector<ValidationError> violations;
  bool ok() const { return violations.empty(); }
};
SceneCheck validate_against_scene(const ActionProgram& program,
                                  const std::set<std::string>& known_objects);

}  // namespace souschef::lang
