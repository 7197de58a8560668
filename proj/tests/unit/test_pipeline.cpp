#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "souschef/pipeline.hpp"
#include "test_helpers.hpp"

using namespace souschef;
using namespace souschef::flow;

namespace {

PipelineConfig mock_config() {
  auto config = load_config("assets/configs/mock_config.json");
  REQUIRE(config.ok());
  return config.value();
}

sim::Scene full_scene() {
  auto scene = sim::load_scene("assets/scenes/kitchen_full.json");
  REQUIRE(scene.ok());
  return std::move(scene).value();
}

const rag::Recipe& recipe_named(const PipelineConfig& config, const std::string& name) {
  for (const auto& r : config.recipes)
    if (r.name == name) return r;
  FAIL("no recipe named " << name);
  return config.recipes.front();
}

}  // namespace

TEST_CASE("load_config resolves referenced assets") {
  const auto config = mock_config();
  CHECK(config.recipes.size() == 3);
  CHECK(config.chat.kind == llm::BackendConfig::Kind::Mock);
  CHECK(config.chat.scenario.rules.size() == 6);
  CHECK(config.prompts.planner.find("[start of plan]") != std::string::npos);
  CHECK(config.seed == 12345);

  CHECK(!load_config("assets/configs/missing.json").ok());
}

TEST_CASE("planner prompts carry the tags, the task, and every ingredient") {
  const auto config = mock_config();
  const auto& recipe = recipe_named(config, "Vegetable Salad");
  const std::vector<std::string> objects = {"cucumber", "tomato", "pepper", "grape"};
  const std::string prompt = render_planner_prompt(config.prompts, recipe, objects);
  CHECK(prompt.find("[start of plan]") != std::string::npos);
  CHECK(prompt.find("[end of plan]") != std::string::npos);
  CHECK(prompt.find("Task: prepare Vegetable Salad") != std::string::npos);
  for (const auto& ing : recipe.ingredients) CHECK(prompt.find(ing) != std::string::npos);
  CHECK(prompt.find("{{") == std::string::npos);  // no unfilled placeholders
  CHECK(prompt == render_planner_prompt(config.prompts, recipe, objects));  // byte-stable
}

TEST_CASE("codegen prompts document all ten functions and a parsable example") {
  const auto config = mock_config();
  lang::PlanDocument plan;
  plan.steps = {"1. do something"};
  const std::string prompt = render_codegen_prompt(config.prompts, plan);
  for (const char* name :
       {"open_gripper", "move_to_object", "grasp", "cut", "pour", "put", "toss",
        "cut_and_put_in", "get_list_of_objects", "get_bounding_boxes"})
    CHECK(prompt.find(name) != std::string::npos);
  CHECK(prompt == render_codegen_prompt(config.prompts, plan));

  // The one-shot example inside the template must itself parse.
  const auto begin = prompt.find("Example code:\n");
  REQUIRE(begin != std::string::npos);
  const auto end = prompt.find("\n\nPlan:", begin);
  REQUIRE(end != std::string::npos);
  const std::string example = prompt.substr(begin + 14, end - begin - 14);
  const auto parsed = lang::parse_program(example);
  REQUIRE(parsed.ok());
  CHECK(parsed->calls.size() == 6);
}

TEST_CASE("goal_check accepts finished salads and names what is missing") {
  const auto config = mock_config();
  const auto goal = GoalSpec::from_recipe(recipe_named(config, "Vegetable Salad"));
  CHECK(goal.required.size() == 3);
  CHECK(goal.mix_required);

  sim::WorldState done = testutil::small_kitchen();
  // small_kitchen lacks cucumber; build the goal against pepper/tomato only.
  GoalSpec small_goal;
  small_goal.required = {{"pepper", rag::PrepRule::Cut}, {"tomato", rag::PrepRule::Cut}};
  small_goal.mix_required = true;
  for (const char* name : {"pepper", "tomato"}) {
    done.objects.at(name).location = {sim::Place::Bowl};
    done.objects.at(name).state = sim::ObjectState::Cut;
    done.objects.at(name).was_cut = true;
  }
  done.bowl_mixed = true;
  CHECK(goal_check(done, small_goal).met);

  // Mixed salads still count their ingredients as cut.
  sim::WorldState mixed = done;
  for (const char* name : {"pepper", "tomato"})
    mixed.objects.at(name).state = sim::ObjectState::Mixed;
  CHECK(goal_check(mixed, small_goal).met);

  sim::WorldState unmixed = done;
  unmixed.bowl_mixed = false;
  const auto check = goal_check(unmixed, small_goal);
  CHECK(!check.met);
  REQUIRE(check.unmet.size() == 1);
  CHECK(check.unmet[0].find("mixing required") != std::string::npos);

  sim::WorldState left_out = done;
  left_out.objects.at("tomato").location = {sim::Place::IngredientArea};
  const auto check2 = goal_check(left_out, small_goal);
  CHECK(!check2.met);
  CHECK(check2.unmet[0].find("tomato") != std::string::npos);

  // A whole object swept into the bowl does not satisfy a cut rule.
  sim::WorldState uncut = done;
  uncut.objects.at("tomato").state = sim::ObjectState::Whole;
  uncut.objects.at("tomato").was_cut = false;
  CHECK(!goal_check(uncut, small_goal).met);

  // Pour rules look at the bowl's content entries.
  GoalSpec pour_goal;
  pour_goal.required = {{"mayonnaise", rag::PrepRule::Pour}};
  pour_goal.mix_required = false;
  sim::WorldState poured = testutil::small_kitchen();
  CHECK(!goal_check(poured, pour_goal).met);
  poured.bowl_contents.push_back("mayonnaise");
  CHECK(goal_check(poured, pour_goal).met);
}

TEST_CASE("handle_request completes all three salads against the full kitchen") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto scene = full_scene();

  const std::vector<std::pair<std::string, std::string>> cases = {
      {"Please make me a vegetable salad.", "Vegetable Salad"},
      {"I would like a Russian salad, please.", "Russian Salad"},
      {"Could you prepare a fruit salad for me?", "Fruit Salad"},
  };
  for (const auto& [request, expected_recipe] : cases) {
    const auto trace = pipeline->run(request, scene);
    REQUIRE(trace.retrieval.has_value());
    CHECK(trace.retrieval->recipe.name == expected_recipe);
    CHECK(trace.outcome == Outcome::Completed);
    CHECK(trace.goal.has_value());
    CHECK(trace.goal->met);
    CHECK(trace.final_state.bowl_mixed);
  }
}

TEST_CASE("a missing ingredient refuses before any planner or codegen call") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  auto scene = full_scene();
  scene.state.objects.erase("pepper");

  const auto trace = pipeline->run("Please make me a vegetable salad.", scene);
  CHECK(trace.outcome == Outcome::Refused);
  CHECK(trace.outcome_detail.find("pepper") != std::string::npos);
  CHECK(trace.final_state == scene.state);          // world untouched, bit-identical
  CHECK(trace.execution.events.empty());            // zero sim operations
  CHECK(trace.transcript.count_stage("planner") == 0);
  CHECK(trace.transcript.count_stage("codegen") == 0);
  CHECK(trace.availability.has_value());
  CHECK(!trace.availability->available);
}

TEST_CASE("perception runs before planning; planning before codegen") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto trace = pipeline->run("Please make me a fruit salad.", full_scene());
  REQUIRE(trace.outcome == Outcome::Completed);
  const auto entries = trace.transcript.snapshot();
  int planner_at = -1, codegen_at = -1;
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    if (entries[static_cast<std::size_t>(i)].stage == "planner" && planner_at < 0) planner_at = i;
    if (entries[static_cast<std::size_t>(i)].stage == "codegen" && codegen_at < 0) codegen_at = i;
  }
  REQUIRE(planner_at >= 0);
  REQUIRE(codegen_at >= 0);
  CHECK(planner_at < codegen_at);
  CHECK(!trace.detected.empty());  // perception happened (and is logged pre-plan)
}

TEST_CASE("a scripted bad program yields CodeParseFailed and leaves the world alone") {
  auto config = mock_config();
  // Override the codegen rules with one that emits an unknown function.
  llm::MockScenario scenario = config.chat.scenario;
  scenario.rules.insert(scenario.rules.begin(),
                        {{"Translate the plan"}, std::nullopt, std::nullopt,
                         "fly('tool', 'pepper')"});
  config.chat.scenario = scenario;
  const auto pipeline = Pipeline::create(std::move(config));
  REQUIRE(pipeline.ok());

  const auto scene = full_scene();
  const auto trace = pipeline->run("Please make me a vegetable salad.", scene);
  CHECK(trace.outcome == Outcome::CodeParseFailed);
  CHECK(trace.outcome_detail.find("UnknownFunction") != std::string::npos);
  CHECK(trace.final_state == scene.state);
  CHECK(trace.execution.events.empty());
}

TEST_CASE("a program naming an absent object fails scene validation") {
  auto config = mock_config();
  llm::MockScenario scenario = config.chat.scenario;
  scenario.rules.insert(scenario.rules.begin(),
                        {{"Translate the plan"}, std::nullopt, std::nullopt,
                         "move_to_object('gripper', 'durian')"});
  config.chat.scenario = scenario;
  const auto pipeline = Pipeline::create(std::move(config));
  REQUIRE(pipeline.ok());
  const auto trace = pipeline->run("Please make me a vegetable salad.", full_scene());
  CHECK(trace.outcome == Outcome::CodeParseFailed);
  CHECK(trace.outcome_detail.find("durian") != std::string::npos);
}

TEST_CASE("a planner response without tags fails plan parsing, not the process") {
  auto config = mock_config();
  config.chat.scenario.rules.clear();  // only the tagless default response remains
  const auto pipeline = Pipeline::create(std::move(config));
  REQUIRE(pipeline.ok());
  const auto scene = full_scene();
  const auto trace = pipeline->run("Please make me a vegetable salad.", scene);
  CHECK(trace.outcome == Outcome::PlanParseFailed);
  CHECK(trace.outcome_detail.find("MissingTags") != std::string::npos);
  CHECK(trace.final_state == scene.state);
  CHECK(trace.transcript.count_stage("codegen") == 0);  // failed before codegen
}

TEST_CASE("the trace replays: executing its program on its initial state gives its final state") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto trace = pipeline->run("Please make me a Russian salad.", full_scene());
  REQUIRE(trace.outcome == Outcome::Completed);
  REQUIRE(trace.program.has_value());
  const auto replay = sim::execute_program(trace.initial_state, *trace.program);
  REQUIRE(replay.ok());
  CHECK(replay.state == trace.final_state);
  CHECK(replay.trace == trace.execution);
}

TEST_CASE("session traces serialize as one JSON object per line") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto trace = pipeline->run("Please make me a fruit salad.", full_scene());
  const std::string jsonl = trace.to_jsonl();
  std::istringstream lines(jsonl);
  std::string line;
  std::set<std::string> stages;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto parsed = nlohmann::json::parse(line, nullptr, false);
    REQUIRE(!parsed.is_discarded());
    stages.insert(parsed.at("stage").get<std::string>());
    ++count;
  }
  CHECK(count > 10);
  for (const char* stage : {"request", "retrieval", "detection", "availability",
                            "planner_prompt", "planner_response", "plan", "codegen_prompt",
                            "codegen_response", "program", "execution", "goal_check",
                            "transcript", "outcome"})
    CHECK(stages.count(stage));
}

TEST_CASE("deterministic sessions: same request, same scene, same trace") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto scene = full_scene();
  const auto a = pipeline->run("Please make me a vegetable salad.", scene);
  const auto b = pipeline->run("Please make me a vegetable salad.", scene);
  CHECK(a.to_jsonl() == b.to_jsonl());
  CHECK(a.final_state == b.final_state);
}

TEST_CASE("validate-only mode stops short of the simulator") {
  const auto pipeline = Pipeline::create(mock_config());
  REQUIRE(pipeline.ok());
  const auto scene = full_scene();
  const auto trace = pipeline->run("Please make me a vegetable salad.", scene,
                                   Pipeline::Mode::ValidateOnly);
  CHECK(trace.outcome == Outcome::Completed);
  CHECK(trace.execution.events.empty());
  CHECK(trace.final_state == scene.state);
  CHECK(trace.program.has_value());
}
