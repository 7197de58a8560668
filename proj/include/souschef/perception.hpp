#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "souschef/geometry.hpp"
#include "souschef/kitchen.hpp"
#include "souschef/llm_client.hpp"
#include "souschef/recipes.hpp"
#include "souschef/result.hpp"

namespace souschef::vision {

struct DetectedObject {
  std::string name;  // caption
  geom::PixelBox box;
  std::optional<geom::WorldPoint> world_position;
  bool operator==(const DetectedObject&) const = default;
};

struct AvailabilityReport {
  std::set<std::string> required;
  std::set<std::string> present;
  std::set<std::string> missing;  // required \ present
  bool available = false;
};

// Seeded detector noise. miss_rate drops detections; mislabel_rate assigns
// the caption of a truly missing required ingredient to a present object
// (the failure mode real detectors show on incomplete scenes).
struct ErrorInjection {
  double miss_rate = 0.0;
  double mislabel_rate = 0.0;
  std::uint64_t seed = 0;
};

struct PerceptionError {
  std::string code;  // transport / response_parse / sim
  std::string message;
};

// Case-fold and strip a trailing plural 's'; all caption comparisons go
// through this.
std::string normalize_token(const std::string& token);

// Ground-truth detection from the simulator, with injection applied after
// (drops first, then mislabels).
Result<std::vector<DetectedObject>, PerceptionError> detect_objects_sim(
    const sim::WorldState& world, const geom::CameraModel& camera,
    const ErrorInjection& injection = {}, const std::vector<std::string>& required = {});

// Remote VLM detection: sends a grounding prompt with the scene image and
// parses "name: x_min y_min x_max y_max" lines.
Result<std::vector<DetectedObject>, PerceptionError> detect_objects_remote(
    const llm::ChatClient& client, const std::string& image_ref,
    llm::Transcript* transcript = nullptr);

// Parses the line-oriented grounding response (exposed for tests).
Result<std::vector<DetectedObject>, PerceptionError> parse_grounding_response(
    const std::string& text);

std::string grounding_prompt();

// Fills world_position = pixel_to_world(box center) for every detection.
Result<std::vector<DetectedObject>, PerceptionError> ground_detections(
    std::vector<DetectedObject> detections, const geom::CameraModel& camera);

AvailabilityReport check_availability(const rag::Recipe& recipe,
                                      const std::vector<DetectedObject>& detections);

// Per-scene metric contributions.
struct SceneScore {
  bool list_correct = false;
  // (required ingredient, caption correct) in recipe order
  std::vector<std::pair<std::string, bool>> captions;
  int captions_correct() const {
    int n = 0;
    for (const auto& [_, ok] : captions) n += ok ? 1 : 0;
    return n;
  }
};

SceneScore score_scene(const std::vector<std::string>& ground_truth,
                       const std::vector<std::string>& required,
                       const std::vector<DetectedObject>& detections);

struct VisionMetrics {
  int scenes = 0;
  int list_correct = 0;
  int captions = 0;
  int captions_correct = 0;

  void add(const SceneScore& s) {
    ++scenes;
    list_correct += s.list_correct ? 1 : 0;
    captions += static_cast<int>(s.captions.size());
    captions_correct += s.captions_correct();
  }
  double list_accuracy() const { return scenes ? double(list_correct) / scenes : 0.0; }
  double caption_accuracy() const { return captions ? double(captions_correct) / captions : 0.0; }
};

}  // namespace souschef::vision
