#include "souschef/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace souschef::flow {

namespace {

using nlohmann::json;

DocError doc_error(DocError::Code code, std::string field, std::string message) {
  return {code, std::move(field), std::move(message)};
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

Result<std::string, DocError> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return doc_error(DocError::Code::Io, "", "cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Result<llm::BackendConfig, DocError> parse_backend(const json& j, const std::string& field,
                                                   const std::filesystem::path& base) {
  if (!j.is_object()) return doc_error(DocError::Code::Parse, field, "backend must be an object");
  llm::BackendConfig config;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "kind" && key != "base_url" && key != "model" && key != "auth_env" &&
        key != "timeout_ms" && key != "retries" && key != "scenario")
      return doc_error(DocError::Code::Parse, field + "." + key, "unknown backend field");
  }
  const std::string kind = j.value("kind", "mock");
  if (kind == "mock") {
    config.kind = llm::BackendConfig::Kind::Mock;
    if (j.contains("scenario")) {
      std::filesystem::path p = j.at("scenario").get<std::string>();
      if (p.is_relative()) p = base / p;
      auto scenario = llm::load_scenario(p);
      if (!scenario.ok()) return scenario.error();
      config.scenario = scenario.value();
    }
  } else if (kind == "remote") {
    config.kind = llm::BackendConfig::Kind::Remote;
    if (!j.contains("base_url") || !j.at("base_url").is_string())
      return doc_error(DocError::Code::Parse, field + ".base_url",
                       "remote backend needs a base_url");
    config.base_url = j.at("base_url").get<std::string>();
    config.model = j.value("model", "");
    config.auth_env = j.value("auth_env", "");
    config.timeout_ms = j.value("timeout_ms", 30000);
    if (j.contains("retries")) {
      config.retry.count = j.at("retries").value("count", 0);
      config.retry.backoff_ms = j.at("retries").value("backoff_ms", 0);
    }
  } else {
    return doc_error(DocError::Code::Parse, field + ".kind", "kind must be mock or remote");
  }
  return config;
}

}  // namespace

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Completed: return "Completed";
    case Outcome::Refused: return "Refused";
    case Outcome::PlanParseFailed: return "PlanParseFailed";
    case Outcome::CodeParseFailed: return "CodeParseFailed";
    case Outcome::ExecutionFailed: return "ExecutionFailed";
    case Outcome::GoalNotMet: return "GoalNotMet";
  }
  return "?";
}

GoalSpec GoalSpec::from_recipe(const rag::Recipe& recipe) {
  GoalSpec goal;
  goal.mix_required = recipe.mix;
  for (const auto& ing : recipe.ingredients) {
    const auto it = recipe.prep.find(ing);
    goal.required[ing] = it == recipe.prep.end() ? rag::PrepRule::Cut : it->second;
  }
  return goal;
}

GoalCheck goal_check(const sim::WorldState& state, const GoalSpec& goal) {
  GoalCheck check;
  for (const auto& [token, rule] : goal.required) {
    const std::string norm = vision::normalize_token(token);
    if (rule == rag::PrepRule::Pour) {
      bool found = false;
      for (const auto& c : state.bowl_contents)
        found = found || vision::normalize_token(c) == norm;
      if (!found) check.unmet.push_back(token + ": not poured into the bowl");
      continue;
    }
    const sim::SimObject* obj = nullptr;
    for (const auto& [name, o] : state.objects)
      if (vision::normalize_token(name) == norm) {
        obj = &o;
        break;
      }
    if (!obj) {
      check.unmet.push_back(token + ": not present in the scene");
      continue;
    }
    if (obj->location.place != sim::Place::Bowl) {
      check.unmet.push_back(token + ": expected in the bowl, found at " +
                            std::string(sim::to_string(obj->location.place)) + " (" +
                            sim::to_string(obj->state) + ")");
      continue;
    }
    if (rule == rag::PrepRule::Cut && !obj->was_cut)
      check.unmet.push_back(token + ": in the bowl but never cut");
  }
  if (state.bowl_mixed != goal.mix_required)
    check.unmet.push_back(goal.mix_required ? "bowl: mixing required but not tossed"
                                            : "bowl: tossed although mixing is not wanted");
  check.met = check.unmet.empty();
  return check;
}

std::string render_planner_prompt(const PromptTemplates& templates, const rag::Recipe& recipe,
                                  const std::vector<std::string>& objects) {
  std::string out = templates.planner;
  out = replace_all(out, "{{recipe_name}}", recipe.name);
  out = replace_all(out, "{{ingredients}}", join(recipe.ingredients, ", "));
  out = replace_all(out, "{{objects}}", join(objects, ", "));
  out = replace_all(out, "{{steps}}", join(recipe.steps, "\n"));
  return out;
}

std::string render_codegen_prompt(const PromptTemplates& templates,
                                  const lang::PlanDocument& plan) {
  std::string out = templates.codegen;
  out = replace_all(out, "{{plan}}", join(plan.steps, "\n"));
  return out;
}

Result<PipelineConfig, DocError> load_config(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (!text.ok()) return text.error();
  json j = json::parse(text.value(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return doc_error(DocError::Code::Parse, "", "config is not a JSON object");
  const std::filesystem::path base = path.parent_path();

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "chat_backend" && key != "embed_backend" && key != "vision_backend" &&
        key != "recipes" && key != "prompts" && key != "plan_retries" &&
        key != "codegen_retries" && key != "seed")
      return doc_error(DocError::Code::Parse, key, "unknown config key");
  }

  PipelineConfig config;
  if (j.contains("chat_backend")) {
    auto backend = parse_backend(j.at("chat_backend"), "chat_backend", base);
    if (!backend.ok()) return backend.error();
    config.chat = backend.value();
  }
  if (j.contains("embed_backend")) {
    auto backend = parse_backend(j.at("embed_backend"), "embed_backend", base);
    if (!backend.ok()) return backend.error();
    config.embed = backend.value();
  }
  if (j.contains("vision_backend")) {
    const auto& v = j.at("vision_backend");
    if (!v.is_object())
      return doc_error(DocError::Code::Parse, "vision_backend", "must be an object");
    const std::string kind = v.value("kind", "sim");
    if (kind == "sim") {
      config.vision.kind = VisionConfig::Kind::Sim;
      if (v.contains("injection")) {
        const auto& inj = v.at("injection");
        config.vision.injection.miss_rate = inj.value("miss_rate", 0.0);
        config.vision.injection.mislabel_rate = inj.value("mislabel_rate", 0.0);
        config.vision.injection.seed = inj.value("seed", 0ull);
      }
    } else if (kind == "remote") {
      config.vision.kind = VisionConfig::Kind::Remote;
      auto backend = parse_backend(v, "vision_backend", base);
      if (!backend.ok()) return backend.error();
      config.vision.remote = backend.value();
    } else {
      return doc_error(DocError::Code::Parse, "vision_backend.kind", "kind must be sim or remote");
    }
  }

  if (!j.contains("recipes") || !j.at("recipes").is_string())
    return doc_error(DocError::Code::Parse, "recipes", "config needs a recipes path");
  std::filesystem::path recipes_path = j.at("recipes").get<std::string>();
  if (recipes_path.is_relative()) recipes_path = base / recipes_path;
  auto recipes = rag::load_recipes(recipes_path);
  if (!recipes.ok()) return recipes.error();
  config.recipes = recipes.value();
  if (config.recipes.empty())
    return doc_error(DocError::Code::Invariant, "recipes", "recipe corpus is empty");

  if (!j.contains("prompts") || !j.at("prompts").is_object())
    return doc_error(DocError::Code::Parse, "prompts", "config needs prompts.planner/codegen");
  for (const char* key : {"planner", "codegen"}) {
    if (!j.at("prompts").contains(key) || !j.at("prompts").at(key).is_string())
      return doc_error(DocError::Code::Parse, std::string("prompts.") + key, "missing path");
    std::filesystem::path p = j.at("prompts").at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    auto text_result = read_file(p);
    if (!text_result.ok()) return text_result.error();
    (std::string(key) == "planner" ? config.prompts.planner : config.prompts.codegen) =
        text_result.value();
  }

  config.plan_retries = j.value("plan_retries", 0);
  config.codegen_retries = j.value("codegen_retries", 0);
  config.seed = j.value("seed", 0ull);
  return config;
}

std::string SessionTrace::to_jsonl() const {
  std::vector<json> lines;
  lines.push_back({{"stage", "request"}, {"text", request}});
  if (retrieval)
    lines.push_back({{"stage", "retrieval"},
                     {"recipe", retrieval->recipe.name},
                     {"score", retrieval->score}});
  if (!detected.empty() || availability)
    lines.push_back({{"stage", "detection"}, {"captions", detected}});
  if (availability)
    lines.push_back({{"stage", "availability"},
                     {"required", std::vector<std::string>(availability->required.begin(),
                                                           availability->required.end())},
                     {"present", std::vector<std::string>(availability->present.begin(),
                                                          availability->present.end())},
                     {"missing", std::vector<std::string>(availability->missing.begin(),
                                                          availability->missing.end())},
                     {"available", availability->available}});
  if (!planner_prompt.empty())
    lines.push_back({{"stage", "planner_prompt"}, {"text", planner_prompt}});
  if (!raw_plan.empty()) lines.push_back({{"stage", "planner_response"}, {"text", raw_plan}});
  if (plan) lines.push_back({{"stage", "plan"}, {"steps", plan->steps}});
  if (!codegen_prompt.empty())
    lines.push_back({{"stage", "codegen_prompt"}, {"text", codegen_prompt}});
  if (!raw_code.empty()) lines.push_back({{"stage", "codegen_response"}, {"text", raw_code}});
  if (program) {
    std::vector<std::string> calls;
    for (const auto& c : program->calls) calls.push_back(lang::serialize_call(c));
    lines.push_back({{"stage", "program"}, {"calls", calls}});
  }
  for (const auto& e : execution.events)
    lines.push_back({{"stage", "execution"},
                     {"call_index", e.call_index},
                     {"call", e.call},
                     {"phase", e.phase},
                     {"note", e.note}});
  if (goal) lines.push_back({{"stage", "goal_check"}, {"met", goal->met}, {"unmet", goal->unmet}});
  for (const auto& t : transcript.snapshot())
    lines.push_back({{"stage", "transcript"},
                     {"purpose", t.stage},
                     {"backend", t.backend},
                     {"ok", t.ok},
                     {"detail", t.response_or_error}});
  json outcome_line{{"stage", "outcome"}, {"outcome", to_string(outcome)}};
  if (!outcome_detail.empty()) outcome_line["detail"] = outcome_detail;
  if (failed_call_index >= 0) outcome_line["call_index"] = failed_call_index;
  lines.push_back(outcome_line);

  std::string out;
  for (const auto& l : lines) {
    out += l.dump();
    out += '\n';
  }
  return out;
}

Result<Pipeline, std::string> Pipeline::create(PipelineConfig config) {
  Pipeline p;
  p.config_ = std::move(config);
  if (p.config_.recipes.empty()) return std::string("pipeline needs a nonempty recipe corpus");
  p.chat_ = std::make_unique<llm::ChatClient>(p.config_.chat);
  p.vision_chat_ = std::make_unique<llm::ChatClient>(p.config_.vision.remote);
  p.embedder_ = std::make_unique<llm::Embedder>(p.config_.embed);
  auto store = rag::RecipeStore::build(p.config_.recipes, *p.embedder_, nullptr);
  if (!store.ok()) return "recipe indexing failed: " + store.error().message;
  p.store_ = std::move(store).value();
  return p;
}

SessionTrace Pipeline::run(const std::string& request, const sim::Scene& scene, Mode mode) const {
  SessionTrace trace;
  trace.request = request;
  trace.initial_state = scene.state;
  trace.final_state = scene.state;

  // Retrieval. k=1: the top recipe drives the whole session.
  auto retrieved = store_.retrieve(request, 1, &trace.transcript);
  if (!retrieved.ok() || retrieved->empty()) {
    trace.outcome = Outcome::PlanParseFailed;
    trace.outcome_detail =
        "retrieval failed: " + (retrieved.ok() ? "no results" : retrieved.error().message);
    return trace;
  }
  trace.retrieval = retrieved->front();
  const rag::Recipe& recipe = trace.retrieval->recipe;

  // Perception (read-only; runs before any planning).
  std::vector<vision::DetectedObject> detections;
  if (config_.vision.kind == VisionConfig::Kind::Sim) {
    auto detected = vision::detect_objects_sim(scene.state, scene.camera,
                                               config_.vision.injection, recipe.ingredients);
    if (!detected.ok()) {
      trace.outcome = Outcome::Refused;
      trace.outcome_detail = "perception failed: " + detected.error().message;
      return trace;
    }
    detections = std::move(detected).value();
  } else {
    auto detected = vision::detect_objects_remote(*vision_chat_, scene.id, &trace.transcript);
    if (!detected.ok()) {
      trace.outcome = Outcome::Refused;
      trace.outcome_detail = "perception failed: " + detected.error().message;
      return trace;
    }
    detections = std::move(detected).value();
  }
  for (const auto& d : detections) trace.detected.push_back(d.name);

  // Availability gate: a missing ingredient stops the session before any
  // planner or codegen call and before any simulated motion.
  trace.availability = vision::check_availability(recipe, detections);
  if (!trace.availability->available) {
    trace.outcome = Outcome::Refused;
    const std::vector<std::string> missing(trace.availability->missing.begin(),
                                           trace.availability->missing.end());
    trace.outcome_detail = "missing: " + join(missing, ", ");
    return trace;
  }

  // Semantic plan.
  trace.planner_prompt = render_planner_prompt(config_.prompts, recipe, trace.detected);
  llm::ChatRequest plan_request;
  plan_request.model = config_.chat.model;
  plan_request.messages.push_back({llm::Role::User, trace.planner_prompt, std::nullopt});
  if (config_.seed) plan_request.seed = config_.seed;

  std::optional<lang::PlanDocument> plan;
  std::string plan_failure;
  for (int attempt = 0; attempt <= config_.plan_retries && !plan; ++attempt) {
    auto response = chat_->chat(plan_request, &trace.transcript, "planner");
    if (!response.ok()) {
      plan_failure = std::string(llm::to_string(response.error().code)) + ": " +
                     response.error().message;
      continue;
    }
    trace.raw_plan = response->content;
    auto parsed = lang::parse_plan(trace.raw_plan);
    if (parsed.ok())
      plan = parsed.value();
    else
      plan_failure = std::string(lang::to_string(parsed.error().code)) + ": " +
                     parsed.error().message;
  }
  if (!plan) {
    trace.outcome = Outcome::PlanParseFailed;
    trace.outcome_detail = plan_failure;
    return trace;
  }
  trace.plan = plan;

  // Code generation.
  trace.codegen_prompt = render_codegen_prompt(config_.prompts, *plan);
  llm::ChatRequest code_request;
  code_request.model = config_.chat.model;
  code_request.messages.push_back({llm::Role::User, trace.codegen_prompt, std::nullopt});
  if (config_.seed) code_request.seed = config_.seed;

  std::optional<lang::ActionProgram> program;
  std::string code_failure;
  for (int attempt = 0; attempt <= config_.codegen_retries && !program; ++attempt) {
    auto response = chat_->chat(code_request, &trace.transcript, "codegen");
    if (!response.ok()) {
      code_failure = std::string(llm::to_string(response.error().code)) + ": " +
                     response.error().message;
      continue;
    }
    trace.raw_code = response->content;
    auto parsed = lang::parse_program(trace.raw_code);
    if (parsed.ok())
      program = parsed.value();
    else
      code_failure = std::string(lang::to_string(parsed.error().code)) + " at line " +
                     std::to_string(parsed.error().location.line) + ": " +
                     parsed.error().message;
  }
  if (!program) {
    trace.outcome = Outcome::CodeParseFailed;
    trace.outcome_detail = code_failure;
    return trace;
  }
  trace.program = program;

  // Static scene check before touching the simulator.
  std::set<std::string> known;
  for (const auto& [name, obj] : scene.state.objects)
    if (obj.kind != sim::ObjectKind::Fixture) known.insert(name);
  const auto precheck = lang::validate_against_scene(*program, known);
  if (!precheck.ok()) {
    trace.outcome = Outcome::CodeParseFailed;
    trace.outcome_detail = "scene validation: " + precheck.violations.front().message;
    return trace;
  }

  if (mode == Mode::ValidateOnly) {
    trace.outcome = Outcome::Completed;
    trace.outcome_detail = "validate-only run; execution skipped";
    return trace;
  }

  // Execution.
  auto executed = sim::execute_program(scene.state, *program);
  trace.execution = executed.trace;
  trace.final_state = executed.state;
  if (!executed.ok()) {
    trace.outcome = Outcome::ExecutionFailed;
    trace.failed_call_index = executed.error->call_index;
    trace.outcome_detail = std::string(sim::to_string(executed.error->error.code)) + " at call " +
                           std::to_string(executed.error->call_index) + ": " +
                           executed.error->error.message;
    return trace;
  }

  // Goal check.
  trace.goal = goal_check(trace.final_state, GoalSpec::from_recipe(recipe));
  if (!trace.goal->met) {
    trace.outcome = Outcome::GoalNotMet;
    trace.outcome_detail = join(trace.goal->unmet, "; ");
    return trace;
  }
  trace.outcome = Outcome::Completed;
  return trace;
}

}  // namespace souschef::flow
