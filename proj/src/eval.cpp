#include "souschef/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "souschef/rng.hpp"

namespace souschef::eval {

namespace {

using nlohmann::json;

DocError doc_error(DocError::Code code, std::string field, std::string message) {
  return {code, std::move(field), std::move(message)};
}

constexpr std::array<const char*, 8> kPhrasings = {
    "Please make me a {salad}.",
    "I would like a {salad}, please.",
    "Could you prepare a {salad} for me?",
    "Make a {salad}.",
    "I'm hungry, fix me a {salad}.",
    "Would you mind preparing a {salad}?",
    "Hey chef, I want a {salad}.",
    "Prepare a {salad} now, please.",
};

constexpr std::array<const char*, 3> kSalads = {"vegetable salad", "Russian salad",
                                                "fruit salad"};

std::string fill_phrase(const std::string& phrase, const std::string& salad) {
  std::string out = phrase;
  const auto pos = out.find("{salad}");
  if (pos != std::string::npos) out.replace(pos, 7, salad);
  return out;
}

double mean_of(const std::vector<json>& rows, const char* key,
               const char* filter_key = nullptr, bool filter_value = true) {
  int total = 0, hits = 0;
  for (const auto& r : rows) {
    if (filter_key && r.value(filter_key, !filter_value) != filter_value) continue;
    if (!r.contains(key)) continue;
    ++total;
    hits += r.at(key).get<bool>() ? 1 : 0;
  }
  return total ? static_cast<double>(hits) / total : 0.0;
}

// caption counts, optionally restricted to rows where filter_key == value.
std::pair<int, int> caption_counts(const std::vector<json>& rows, const char* filter_key,
                                   bool filter_value, bool use_filter) {
  int total = 0, ok = 0;
  for (const auto& r : rows) {
    if (use_filter && r.value(filter_key, !filter_value) != filter_value) continue;
    total += r.value("captions_total", 0);
    ok += r.value("captions_correct", 0);
  }
  return {total, ok};
}

}  // namespace

std::map<std::string, double> recompute_aggregates(const std::string& campaign,
                                                   const std::vector<json>& rows) {
  std::map<std::string, double> agg;
  if (campaign == "codegen") {
    agg["success_rate"] = mean_of(rows, "success");
    agg["cases"] = static_cast<double>(rows.size());
  } else if (campaign == "vision") {
    agg["cases"] = static_cast<double>(rows.size());
    agg["list_accuracy"] = mean_of(rows, "list_correct");
    agg["list_accuracy_complete"] = mean_of(rows, "list_correct", "complete", true);
    agg["list_accuracy_missing"] = mean_of(rows, "list_correct", "complete", false);
    const auto all = caption_counts(rows, nullptr, true, false);
    const auto complete = caption_counts(rows, "complete", true, true);
    const auto missing = caption_counts(rows, "complete", false, true);
    agg["caption_accuracy"] = all.first ? double(all.second) / all.first : 0.0;
    agg["caption_accuracy_complete"] =
        complete.first ? double(complete.second) / complete.first : 0.0;
    agg["caption_accuracy_missing"] =
        missing.first ? double(missing.second) / missing.first : 0.0;
  }
  return agg;
}

std::string EvalReport::summary_text() const {
  std::ostringstream out;
  out << "campaign: " << campaign << "\n";
  if (!header_note.empty()) out << "note: " << header_note << "\n";
  out << "rows: " << rows.size() << "\n";
  for (const auto& [key, value] : aggregates) out << key << ": " << value << "\n";
  return out.str();
}

Result<std::filesystem::path, DocError> EvalReport::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto rows_path = dir / (campaign + "_rows.jsonl");
  {
    std::ofstream out(rows_path);
    if (!out) return doc_error(DocError::Code::Io, "", "cannot write " + rows_path.string());
    for (const auto& r : rows) out << r.dump() << "\n";
  }
  const auto summary_path = dir / (campaign + "_summary.json");
  json summary{{"campaign", campaign},
               {"note", header_note},
               {"rows_file", rows_path.filename().string()},
               {"aggregates", aggregates},
               {"config", config_snapshot}};
  std::ofstream out(summary_path);
  if (!out) return doc_error(DocError::Code::Io, "", "cannot write " + summary_path.string());
  out << summary.dump(2) << "\n";
  return summary_path;
}

Result<EvalReport, DocError> EvalReport::load(const std::filesystem::path& summary_path) {
  std::ifstream in(summary_path);
  if (!in) return doc_error(DocError::Code::Io, "", "cannot open " + summary_path.string());
  json summary = json::parse(in, nullptr, false);
  if (summary.is_discarded() || !summary.is_object())
    return doc_error(DocError::Code::Parse, "", "summary is not a JSON object");

  EvalReport report;
  report.campaign = summary.value("campaign", "");
  report.header_note = summary.value("note", "");
  report.config_snapshot = summary.value("config", json::object());
  if (summary.contains("aggregates"))
    for (auto it = summary["aggregates"].begin(); it != summary["aggregates"].end(); ++it)
      report.aggregates[it.key()] = it.value().get<double>();

  const auto rows_path = summary_path.parent_path() / summary.value("rows_file", "");
  std::ifstream rows_in(rows_path);
  if (!rows_in) return doc_error(DocError::Code::Io, "", "cannot open " + rows_path.string());
  std::string line;
  while (std::getline(rows_in, line)) {
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded())
      return doc_error(DocError::Code::Parse, "", "bad row: " + line.substr(0, 80));
    report.rows.push_back(std::move(row));
  }

  const auto recomputed = recompute_aggregates(report.campaign, report.rows);
  for (const auto& [key, value] : recomputed) {
    const auto it = report.aggregates.find(key);
    if (it == report.aggregates.end() || std::abs(it->second - value) > 1e-9)
      return doc_error(DocError::Code::Invariant, key,
                       "stored aggregate does not match recomputation from rows");
  }
  return report;
}

std::vector<std::string> request_pool(int n, std::uint64_t seed) {
  std::vector<std::string> requests;
  requests.reserve(static_cast<std::size_t>(std::max(0, n)));
  for (int i = 0; i < n; ++i) {
    rng::Stream row_rng(seed + static_cast<std::uint64_t>(i));
    const std::string salad = kSalads[static_cast<std::size_t>(i % 3)];
    const std::string phrase = kPhrasings[row_rng.next_index(kPhrasings.size())];
    requests.push_back(fill_phrase(phrase, salad));
  }
  return requests;
}

EvalReport run_codegen_campaign(const flow::Pipeline& pipeline, const sim::Scene& scene, int n,
                                std::uint64_t seed, bool execute) {
  EvalReport report;
  report.campaign = "codegen";
  std::ostringstream note;
  note << "success means the generated program parses, validates against the scene";
  if (execute) note << ", executes, and reaches the recipe goal";
  note << "; one third of the requests per salad type (remainder on vegetable salad)";
  report.header_note = note.str();
  report.config_snapshot = {{"n", n}, {"seed", seed}, {"execute", execute}};

  const auto requests = request_pool(n, seed);
  for (int i = 0; i < n; ++i) {
    const auto trace =
        pipeline.run(requests[static_cast<std::size_t>(i)], scene,
                     execute ? flow::Pipeline::Mode::Full : flow::Pipeline::Mode::ValidateOnly);
    const bool success = trace.outcome == flow::Outcome::Completed;
    json row{{"index", i},
             {"request", requests[static_cast<std::size_t>(i)]},
             {"salad", kSalads[static_cast<std::size_t>(i % 3)]},
             {"outcome", flow::to_string(trace.outcome)},
             {"success", success}};
    if (!success) row["detail"] = trace.outcome_detail;
    if (trace.retrieval) row["recipe"] = trace.retrieval->recipe.name;
    report.rows.push_back(std::move(row));
  }
  report.aggregates = recompute_aggregates(report.campaign, report.rows);
  return report;
}

namespace {

// Deterministic tabletop layout for synthesized scenes.
sim::WorldState synthesize_scene(const std::vector<std::string>& ingredient_names) {
  sim::WorldState state;
  sim::SimObject board;
  board.name = "cutting_board";
  board.kind = sim::ObjectKind::Fixture;
  board.location = {sim::Place::CuttingBoard};
  board.position = {0.0, 0.35, 0.0};
  state.objects.emplace(board.name, board);
  sim::SimObject bowl;
  bowl.name = "bowl";
  bowl.kind = sim::ObjectKind::Fixture;
  bowl.location = {sim::Place::Bowl};
  bowl.position = {0.0, 0.55, 0.0};
  state.objects.emplace(bowl.name, bowl);

  int index = 0;
  for (const auto& name : ingredient_names) {
    sim::SimObject obj;
    obj.name = name;
    obj.kind = name == "mayonnaise" ? sim::ObjectKind::Container : sim::ObjectKind::Ingredient;
    if (obj.kind == sim::ObjectKind::Container) obj.pourable_contents = name;
    obj.position = {0.25 + 0.05 * (index % 4), -0.15 + 0.08 * (index / 4), 0.0};
    state.objects.emplace(obj.name, obj);
    ++index;
  }
  return state;
}

json scene_to_document(const sim::WorldState& state, const std::string& calibration_ref) {
  json objects = json::array();
  for (const auto& [name, obj] : state.objects) {
    if (obj.kind == sim::ObjectKind::Fixture) continue;
    json entry{{"name", name},
               {"kind", sim::to_string(obj.kind)},
               {"state", sim::to_string(obj.state)},
               {"position", {obj.position.x, obj.position.y, obj.position.z}}};
    if (obj.pourable_contents) entry["pourable_contents"] = *obj.pourable_contents;
    objects.push_back(std::move(entry));
  }
  return json{{"calibration", calibration_ref},
              {"fixtures",
               {{"cutting_board", {0.0, 0.35, 0.0}}, {"bowl", {0.0, 0.55, 0.0}}}},
              {"objects", objects}};
}

}  // namespace

EvalReport run_vision_campaign(const std::vector<rag::Recipe>& recipes,
                               const geom::CameraModel& camera,
                               const VisionCampaignOptions& options) {
  EvalReport report;
  report.campaign = "vision";
  report.header_note =
      "list accuracy: detected caption set equals ground truth; caption accuracy: each "
      "required ingredient reported present iff truly present. Scenes alternate complete / "
      "one-ingredient-missing unless complete_only.";
  report.config_snapshot = {{"cases", options.cases},
                            {"miss_rate", options.miss_rate},
                            {"mislabel_rate", options.mislabel_rate},
                            {"seed", options.seed},
                            {"complete_only", options.complete_only}};

  std::vector<rag::Recipe> corpus;
  for (const auto& r : recipes)
    if (options.recipe_filter.empty() || r.name == options.recipe_filter) corpus.push_back(r);
  if (corpus.empty()) return report;

  const bool emit = !options.emit_dir.empty();
  json manifest = json::array();
  if (emit) {
    std::filesystem::create_directories(options.emit_dir / "scenes");
    std::ofstream calib_out(options.emit_dir / "calibration.json");
    calib_out << geom::calibration_to_json(camera);
  }

  for (int i = 0; i < options.cases; ++i) {
    const rag::Recipe& recipe = corpus[static_cast<std::size_t>(i) % corpus.size()];
    const bool complete = options.complete_only || (i % 2 == 0);

    std::vector<std::string> present = recipe.ingredients;
    std::string removed;
    if (!complete) {
      rng::Stream scene_rng(options.seed * 7919u + static_cast<std::uint64_t>(i));
      const std::size_t drop = scene_rng.next_index(present.size());
      removed = present[drop];
      present.erase(present.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    const sim::WorldState state = synthesize_scene(present);

    vision::ErrorInjection injection;
    injection.miss_rate = options.miss_rate;
    injection.mislabel_rate = options.mislabel_rate;
    injection.seed = options.seed + static_cast<std::uint64_t>(i);  // per-scene stream
    const auto detections =
        vision::detect_objects_sim(state, camera, injection, recipe.ingredients);

    json row{{"index", i}, {"recipe", recipe.name}, {"complete", complete}};
    if (!removed.empty()) row["removed"] = removed;
    if (!detections.ok()) {
      row["error"] = detections.error().message;
      row["list_correct"] = false;
      row["captions_total"] = 0;
      row["captions_correct"] = 0;
    } else {
      const auto truth = sim::sim_list_objects(state);
      const auto score = vision::score_scene(truth, recipe.ingredients, detections.value());
      row["list_correct"] = score.list_correct;
      row["captions_total"] = static_cast<int>(score.captions.size());
      row["captions_correct"] = score.captions_correct();
    }
    report.rows.push_back(std::move(row));

    if (emit) {
      std::ostringstream name;
      name << "scene_" << i << ".json";
      const auto path = options.emit_dir / "scenes" / name.str();
      std::ofstream out(path);
      out << scene_to_document(state, "../calibration.json").dump(2) << "\n";
      manifest.push_back(json{{"scene", "scenes/" + name.str()},
                              {"recipe", recipe.name},
                              {"complete", complete}});
    }
  }

  if (emit) {
    std::ofstream out(options.emit_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  report.aggregates = recompute_aggregates(report.campaign, report.rows);
  return report;
}

Result<EvalReport, DocError> run_vision_campaign_from_manifest(
    const std::filesystem::path& manifest_path, const std::vector<rag::Recipe>& recipes,
    const VisionCampaignOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) return doc_error(DocError::Code::Io, "", "cannot open " + manifest_path.string());
  json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_array())
    return doc_error(DocError::Code::Parse, "", "manifest is not a JSON array");

  EvalReport report;
  report.campaign = "vision";
  report.header_note = "vision campaign over manifest " + manifest_path.string();
  report.config_snapshot = {{"manifest", manifest_path.string()},
                            {"miss_rate", options.miss_rate},
                            {"mislabel_rate", options.mislabel_rate},
                            {"seed", options.seed}};

  int index = 0;
  for (const auto& entry : manifest) {
    if (!entry.is_object() || !entry.contains("scene") || !entry.contains("recipe"))
      return doc_error(DocError::Code::Parse, "manifest", "entry needs scene and recipe");
    std::filesystem::path scene_path = entry.at("scene").get<std::string>();
    if (scene_path.is_relative()) scene_path = manifest_path.parent_path() / scene_path;
    auto scene = sim::load_scene(scene_path);
    if (!scene.ok()) return scene.error();

    const std::string recipe_name = entry.at("recipe").get<std::string>();
    const rag::Recipe* recipe = nullptr;
    for (const auto& r : recipes)
      if (r.name == recipe_name) recipe = &r;
    if (!recipe)
      return doc_error(DocError::Code::Parse, "recipe", "unknown recipe '" + recipe_name + "'");

    vision::ErrorInjection injection;
    injection.miss_rate = options.miss_rate;
    injection.mislabel_rate = options.mislabel_rate;
    injection.seed = options.seed + static_cast<std::uint64_t>(index);
    const auto detections = vision::detect_objects_sim(scene->state, scene->camera, injection,
                                                       recipe->ingredients);

    json row{{"index", index},
             {"scene", scene_path.string()},
             {"recipe", recipe_name},
             {"complete", entry.value("complete", true)}};
    if (!detections.ok()) {
      row["error"] = detections.error().message;
      row["list_correct"] = false;
      row["captions_total"] = 0;
      row["captions_correct"] = 0;
    } else {
      const auto truth = sim::sim_list_objects(scene->state);
      const auto score = vision::score_scene(truth, recipe->ingredients, detections.value());
      row["list_correct"] = score.list_correct;
      row["captions_total"] = static_cast<int>(score.captions.size());
      row["captions_correct"] = score.captions_correct();
    }
    report.rows.push_back(std::move(row));
    ++index;
  }
  report.aggregates = recompute_aggregates(report.campaign, report.rows);
  return report;
}

}  // namespace souschef::eval
