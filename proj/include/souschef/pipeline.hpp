#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "souschef/action_lang.hpp"
#include "souschef/kitchen.hpp"
#include "souschef/llm_client.hpp"
#include "souschef/perception.hpp"
#include "souschef/recipes.hpp"
#include "souschef/result.hpp"

namespace souschef::flow {

enum class Outcome {
  Completed,
  Refused,
  PlanParseFailed,
  CodeParseFailed,
  ExecutionFailed,
  GoalNotMet,
};

const char* to_string(Outcome o);

// What must be true of the kitchen after execution: every required token in
// the bowl in its prepared form, plus the mixed flag.
struct GoalSpec {
  std::map<std::string, rag::PrepRule> required;
  bool mix_required = true;

  static GoalSpec from_recipe(const rag::Recipe& recipe);
};

struct GoalCheck {
  bool met = false;
  std::vector<std::string> unmet;  // diagnostics naming each failure
};

GoalCheck goal_check(const sim::WorldState& state, const GoalSpec& goal);

struct PromptTemplates {
  std::string planner;
  std::string codegen;
};

// Fills the planner template: task, ingredient and object lists, recipe
// instructions, and the plan tag framing. Byte-stable for fixed inputs.
std::string render_planner_prompt(const PromptTemplates& templates, const rag::Recipe& recipe,
                                  const std::vector<std::string>& objects);

// Fills the code-generation template around the plan; the template carries
// the API documentation, the rules, and one worked example pair.
std::string render_codegen_prompt(const PromptTemplates& templates,
                                  const lang::PlanDocument& plan);

struct VisionConfig {
  enum class Kind { Sim, Remote };
  Kind kind = Kind::Sim;
  vision::ErrorInjection injection;
  llm::BackendConfig remote;  // used when kind == Remote
};

struct PipelineConfig {
  llm::BackendConfig chat;
  llm::BackendConfig embed;
  VisionConfig vision;
  std::vector<rag::Recipe> recipes;
  PromptTemplates prompts;
  int plan_retries = 0;
  int codegen_retries = 0;
  std::uint64_t seed = 0;
};

// Loads a config document, resolving relative paths (recipes, prompts,
// scenario files) against the config file's directory.
Result<PipelineConfig, DocError> load_config(const std::filesystem::path& path);

// Append-only record of one request's journey through the workflow.
struct SessionTrace {
  std::string request;
  std::optional<rag::RetrievalResult> retrieval;
  std::vector<std::string> detected;  // captions, post-injection
  std::optional<vision::AvailabilityReport> availability;
  std::string planner_prompt;
  std::string raw_plan;
  std::optional<lang::PlanDocument> plan;
  std::string codegen_prompt;
  std::string raw_code;
  std::optional<lang::ActionProgram> program;
  sim::ExecutionTrace execution;
  std::optional<GoalCheck> goal;
  llm::Transcript transcript;
  Outcome outcome = Outcome::Refused;
  std::string outcome_detail;
  int failed_call_index = -1;
  sim::WorldState initial_state;
  sim::WorldState final_state;

  // One JSON object per line, one line per stage event.
  std::string to_jsonl() const;
};

// The end-to-end workflow: retrieve, perceive, gate on availability, plan,
// generate code, parse and validate, execute, check the goal. Stage
// failures become the session outcome; nothing escapes the session.
class Pipeline {
 public:
  enum class Mode { Full, ValidateOnly };

  static Result<Pipeline, std::string> create(PipelineConfig config);

  SessionTrace run(const std::string& request, const sim::Scene& scene,
                   Mode mode = Mode::Full) const;

  const PipelineConfig& config() const { return config_; }
  const rag::RecipeStore& store() const { return store_; }

 private:
  Pipeline() = default;

  PipelineConfig config_;
  std::unique_ptr<llm::ChatClient> chat_;
  std::unique_ptr<llm::ChatClient> vision_chat_;
  std::unique_ptr<llm::Embedder> embedder_;
  rag::RecipeStore store_;
};

}  // namespace souschef::flow
