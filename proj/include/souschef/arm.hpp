#pragma once

#include <optional>
#include <string_view>

namespace souschef {

// The two manipulators: "gripper" carries the two-finger gripper and the
// wrist camera, "tool" carries the knife.
enum class ManipulatorId { Gripper, Tool };

inline const char* manipulator_token(ManipulatorId m) {
  return m == ManipulatorId::Gripper ? "gripper" : "tool";
}

inline std::optional<ManipulatorId> manipulator_from_token(std::string_view s) {
  if (s == "gripper") return ManipulatorId::Gripper;
  if (s == "tool") return ManipulatorId::Tool;
  return std::nullopt;
}

}  // namespace souschef
