#include "souschef/perception.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "souschef/rng.hpp"

namespace souschef::vision {

std::string normalize_token(const std::string& token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (out.size() > 1 && out.back() == 's') out.pop_back();
  return out;
}

Result<std::vector<DetectedObject>, PerceptionError> detect_objects_sim(
    const sim::WorldState& world, const geom::CameraModel& camera,
    const ErrorInjection& injection, const std::vector<std::string>& required) {
  const auto names = sim::sim_list_objects(world);
  const auto boxes = sim::sim_bounding_boxes(world, names, camera);
  if (!boxes.ok())
    return PerceptionError{"sim", boxes.error().message};

  std::vector<DetectedObject> detections;
  detections.reserve(names.size());
  for (const auto& name : names) detections.push_back({name, boxes->at(name), std::nullopt});

  rng::Stream stream(injection.seed);
  // Drops first.
  std::vector<DetectedObject> surviving;
  for (auto& d : detections) {
    const double u = stream.next_double();
    if (u >= injection.miss_rate) surviving.push_back(std::move(d));
  }
  // Then mislabels: each required ingredient absent from the scene may have
  // its caption reassigned to one present object.
  std::set<std::string> truth;
  for (const auto& n : names) truth.insert(normalize_token(n));
  for (const auto& req : required) {
    if (truth.count(normalize_token(req))) continue;
    const double u = stream.next_double();
    if (u < injection.mislabel_rate && !surviving.empty()) {
      const std::size_t victim = stream.next_index(surviving.size());
      surviving[victim].name = req;
    }
  }
  return surviving;
}

std::string grounding_prompt() {
  return "List every food item you can see on the table. Reply with one line per item, "
         "exactly in the form\n"
         "name: x_min y_min x_max y_max\n"
         "using pixel coordinates of the item's bounding box. Use lowercase single-token "
         "names and no other text.";
}

Result<std::vector<DetectedObject>, PerceptionError> parse_grounding_response(
    const std::string& text) {
  std::vector<DetectedObject> out;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    std::size_t b = 0;
    while (b < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[b]))) ++b;
    trimmed = trimmed.substr(b);
    if (trimmed.empty()) continue;

    const auto colon = trimmed.find(':');
    if (colon == std::string::npos)
      return PerceptionError{"response_parse",
                             "line " + std::to_string(line_no) + ": expected 'name: box'"};
    DetectedObject d;
    d.name = trimmed.substr(0, colon);
    while (!d.name.empty() && std::isspace(static_cast<unsigned char>(d.name.back())))
      d.name.pop_back();
    std::istringstream nums(trimmed.substr(colon + 1));
    if (!(nums >> d.box.x_min >> d.box.y_min >> d.box.x_max >> d.box.y_max))
      return PerceptionError{"response_parse",
                             "line " + std::to_string(line_no) + ": box needs four numbers"};
    std::string leftover;
    if (nums >> leftover)
      return PerceptionError{"response_parse",
                             "line " + std::to_string(line_no) + ": trailing text after box"};
    if (d.name.empty() || !(d.box.x_min < d.box.x_max) || !(d.box.y_min < d.box.y_max))
      return PerceptionError{"response_parse",
                             "line " + std::to_string(line_no) + ": degenerate detection"};
    out.push_back(std::move(d));
  }
  return out;
}

Result<std::vector<DetectedObject>, PerceptionError> detect_objects_remote(
    const llm::ChatClient& client, const std::string& image_ref, llm::Transcript* transcript) {
  llm::ChatRequest request;
  request.model = client.config().model;
  llm::ChatMessage msg;
  msg.role = llm::Role::User;
  msg.content = grounding_prompt();
  msg.image_ref = image_ref;
  request.messages.push_back(std::move(msg));
  const auto response = client.chat_with_image(request, transcript, "vision");
  if (!response.ok())
    return PerceptionError{"transport",
                           std::string(llm::to_string(response.error().code)) + ": " +
                               response.error().message};
  return parse_grounding_response(response->content);
}

Result<std::vector<DetectedObject>, PerceptionError> ground_detections(
    std::vector<DetectedObject> detections, const geom::CameraModel& camera) {
  for (auto& d : detections) {
    const auto world = geom::pixel_to_world(camera, d.box.center());
    if (!world.ok())
      return PerceptionError{"sim", "cannot ground '" + d.name + "': " + world.error().message};
    d.world_position = world.value();
  }
  return detections;
}

AvailabilityReport check_availability(const rag::Recipe& recipe,
                                      const std::vector<DetectedObject>& detections) {
  AvailabilityReport report;
  std::set<std::string> detected;
  for (const auto& d : detections) detected.insert(normalize_token(d.name));
  for (const auto& ing : recipe.ingredients) {
    const std::string norm = normalize_token(ing);
    report.required.insert(norm);
    if (detected.count(norm))
      report.present.insert(norm);
    else
      report.missing.insert(norm);
  }
  report.available = report.missing.empty();
  return report;
}

SceneScore score_scene(const std::vector<std::string>& ground_truth,
                       const std::vector<std::string>& required,
                       const std::vector<DetectedObject>& detections) {
  std::set<std::string> truth, detected;
  for (const auto& n : ground_truth) truth.insert(normalize_token(n));
  for (const auto& d : detections) detected.insert(normalize_token(d.name));

  SceneScore score;
  score.list_correct = truth == detected;
  for (const auto& req : required) {
    const std::string norm = normalize_token(req);
    // A caption is right when the ingredient is reported iff it is truly
    // there; a mislabeled stand-in makes a missing ingredient "appear".
    const bool correct = truth.count(norm) == detected.count(norm);
    score.captions.emplace_back(req, correct);
  }
  return score;
}

}  // namespace souschef::vision
