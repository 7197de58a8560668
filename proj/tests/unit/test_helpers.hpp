#pragma once

#include <string>
#include <vector>

#include "souschef/geometry.hpp"
#include "souschef/kitchen.hpp"

namespace souschef::testutil {

inline geom::CameraModel identity_camera(double table_z = 1.0) {
  geom::CameraModel m;
  m.table_z_camera = table_z;
  return m;
}

// fx=fy=1000, cx=640, cy=360, camera 0.8 m above the table looking down.
inline geom::CameraModel overhead_camera() {
  geom::CameraModel m;
  m.intrinsics = geom::Intrinsics::from_pinhole(1000, 1000, 640, 360);
  m.extrinsics.rotation.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
  m.extrinsics.translation = {-0.35, 0.0, 0.8};
  m.table_z_camera = 0.8;
  return m;
}

inline sim::SimObject make_object(const std::string& name, geom::WorldPoint pos,
                                  sim::ObjectKind kind = sim::ObjectKind::Ingredient) {
  sim::SimObject obj;
  obj.name = name;
  obj.kind = kind;
  obj.position = pos;
  if (kind == sim::ObjectKind::Container) obj.pourable_contents = name;
  return obj;
}

// Small kitchen: pepper + tomato ingredients, a mayonnaise container, and
// the two fixtures.
inline sim::WorldState small_kitchen() {
  sim::WorldState w;
  sim::SimObject board = make_object("cutting_board", {0.0, 0.35, 0.0}, sim::ObjectKind::Fixture);
  board.location = {sim::Place::CuttingBoard};
  w.objects.emplace(board.name, board);
  sim::SimObject bowl = make_object("bowl", {0.0, 0.55, 0.0}, sim::ObjectKind::Fixture);
  bowl.location = {sim::Place::Bowl};
  w.objects.emplace(bowl.name, bowl);
  w.objects.emplace("pepper", make_object("pepper", {0.30, 0.05, 0.0}));
  w.objects.emplace("tomato", make_object("tomato", {0.30, -0.05, 0.0}));
  w.objects.emplace("mayonnaise",
                    make_object("mayonnaise", {0.40, 0.05, 0.0}, sim::ObjectKind::Container));
  return w;
}

}  // namespace souschef::testutil
