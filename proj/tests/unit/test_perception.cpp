#include <cmath>

#include "doctest.h"

#include "souschef/perception.hpp"
#include "test_helpers.hpp"

using namespace souschef;
using namespace souschef::vision;
using souschef::testutil::overhead_camera;
using souschef::testutil::small_kitchen;
using sim::WorldState;
using sim::sim_list_objects;

TEST_CASE("normalize_token folds case and strips a plural s") {
  CHECK(normalize_token("Grapes") == "grape");
  CHECK(normalize_token("TOMATO") == "tomato");
  CHECK(normalize_token("s") == "s");
  CHECK(normalize_token("peas") == "pea");
}

TEST_CASE("sim detection without injection reports every visible object") {
  const auto detections = detect_objects_sim(small_kitchen(), overhead_camera());
  REQUIRE(detections.ok());
  REQUIRE(detections->size() == 3);
  CHECK((*detections)[0].name == "mayonnaise");
  CHECK((*detections)[1].name == "pepper");
  CHECK((*detections)[2].name == "tomato");
}

TEST_CASE("miss_rate 1 drops everything") {
  ErrorInjection injection;
  injection.miss_rate = 1.0;
  const auto detections = detect_objects_sim(small_kitchen(), overhead_camera(), injection);
  REQUIRE(detections.ok());
  CHECK(detections->empty());
}

TEST_CASE("seeded injection is reproducible") {
  ErrorInjection injection;
  injection.miss_rate = 0.5;
  injection.seed = 99;
  const auto a = detect_objects_sim(small_kitchen(), overhead_camera(), injection);
  const auto b = detect_objects_sim(small_kitchen(), overhead_camera(), injection);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value() == b.value());
}

TEST_CASE("mislabeling reassigns a missing required caption to a present object") {
  WorldState world = small_kitchen();  // has pepper, tomato, mayonnaise
  ErrorInjection injection;
  injection.mislabel_rate = 1.0;
  injection.seed = 7;
  const std::vector<std::string> required = {"pepper", "tomato", "cucumber"};
  const auto detections =
      detect_objects_sim(world, overhead_camera(), injection, required);
  REQUIRE(detections.ok());
  REQUIRE(detections->size() == 3);
  int cucumber_count = 0;
  for (const auto& d : detections.value()) cucumber_count += d.name == "cucumber" ? 1 : 0;
  CHECK(cucumber_count == 1);  // the missing ingredient's caption landed somewhere
}

TEST_CASE("present required ingredients are never mislabeled sources") {
  // All required ingredients present: mislabel has nothing to reassign.
  ErrorInjection injection;
  injection.mislabel_rate = 1.0;
  injection.seed = 3;
  const std::vector<std::string> required = {"pepper", "tomato"};
  const auto detections =
      detect_objects_sim(small_kitchen(), overhead_camera(), injection, required);
  REQUIRE(detections.ok());
  REQUIRE(detections->size() == 3);
  CHECK((*detections)[1].name == "pepper");
  CHECK((*detections)[2].name == "tomato");
}

TEST_CASE("grounded detections land on the true object positions") {
  const WorldState world = small_kitchen();
  const auto camera = overhead_camera();
  const auto detections = detect_objects_sim(world, camera);
  REQUIRE(detections.ok());
  const auto grounded = ground_detections(detections.value(), camera);
  REQUIRE(grounded.ok());
  for (const auto& d : grounded.value()) {
    REQUIRE(d.world_position.has_value());
    const auto& truth = world.objects.at(d.name).position;
    CHECK(std::abs(d.world_position->x - truth.x) < 1e-6);
    CHECK(std::abs(d.world_position->y - truth.y) < 1e-6);
    CHECK(std::abs(d.world_position->z - truth.z) < 1e-6);
  }
}

TEST_CASE("grounding with the identity camera maps box centers straight to the table") {
  std::vector<DetectedObject> detections = {{"thing", {0.25, -0.25, 0.35, -0.15}, std::nullopt}};
  const auto grounded = ground_detections(detections, testutil::identity_camera(1.0));
  REQUIRE(grounded.ok());
  CHECK(grounded->front().world_position->x == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(grounded->front().world_position->y == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(grounded->front().world_position->z == doctest::Approx(1.0));
}

TEST_CASE("check_availability compares normalized token sets") {
  rag::Recipe recipe;
  recipe.name = "Test";
  recipe.ingredients = {"cucumber", "grape", "pepper"};
  // Case folds and one trailing plural s strips: Cucumber and grapes match.
  std::vector<DetectedObject> detections = {{"Cucumber", {0, 0, 1, 1}, std::nullopt},
                                            {"grapes", {0, 0, 1, 1}, std::nullopt}};
  const auto report = check_availability(recipe, detections);
  CHECK(!report.available);
  CHECK(report.missing == std::set<std::string>{"pepper"});
  CHECK(report.present == std::set<std::string>{"cucumber", "grape"});

  detections.push_back({"pepper", {0, 0, 1, 1}, std::nullopt});
  detections.push_back({"tomato", {0, 0, 1, 1}, std::nullopt});  // extras are fine
  CHECK(check_availability(recipe, detections).available);
}

TEST_CASE("score_scene: perfect, dropped, and mislabeled cases") {
  const std::vector<std::string> truth = {"pepper", "tomato"};
  const std::vector<std::string> required = {"pepper", "tomato", "cucumber"};

  std::vector<DetectedObject> perfect = {{"pepper", {0, 0, 1, 1}, std::nullopt},
                                         {"tomato", {0, 0, 1, 1}, std::nullopt}};
  auto score = score_scene(truth, required, perfect);
  CHECK(score.list_correct);
  CHECK(score.captions_correct() == 3);  // cucumber correctly reported absent

  std::vector<DetectedObject> dropped = {{"pepper", {0, 0, 1, 1}, std::nullopt}};
  score = score_scene(truth, required, dropped);
  CHECK(!score.list_correct);
  CHECK(score.captions_correct() == 2);  // tomato caption wrong

  // Missing cucumber's caption wrongly lands on the tomato.
  std::vector<DetectedObject> mislabeled = {{"pepper", {0, 0, 1, 1}, std::nullopt},
                                            {"cucumber", {0, 0, 1, 1}, std::nullopt}};
  score = score_scene(truth, required, mislabeled);
  CHECK(!score.list_correct);
  CHECK(score.captions_correct() == 1);  // only pepper is right
}

TEST_CASE("zero injection means perfect metrics over many scenes") {
  VisionMetrics metrics;
  const auto camera = overhead_camera();
  for (int i = 0; i < 50; ++i) {
    const WorldState world = small_kitchen();
    const std::vector<std::string> required = {"pepper", "tomato", "mayonnaise"};
    const auto detections = detect_objects_sim(world, camera, {}, required);
    REQUIRE(detections.ok());
    metrics.add(score_scene(sim_list_objects(world), required, detections.value()));
  }
  CHECK(metrics.list_accuracy() == 1.0);
  CHECK(metrics.caption_accuracy() == 1.0);
}

TEST_CASE("miss_rate 0.2 over 3-object scenes lands near the 0.8^3 expectation") {
  VisionMetrics metrics;
  const auto camera = overhead_camera();
  const std::vector<std::string> required = {"mayonnaise", "pepper", "tomato"};
  for (int i = 0; i < 1000; ++i) {
    ErrorInjection injection;
    injection.miss_rate = 0.2;
    injection.seed = 5000 + static_cast<std::uint64_t>(i);
    const WorldState world = small_kitchen();
    const auto detections = detect_objects_sim(world, camera, injection, required);
    REQUIRE(detections.ok());
    metrics.add(score_scene(sim_list_objects(world), required, detections.value()));
  }
  CHECK(metrics.list_accuracy() == doctest::Approx(0.512).epsilon(0.1));
}

TEST_CASE("parse_grounding_response: strict line format") {
  const auto good = parse_grounding_response(
      "pepper: 100 120 140 160\n"
      "\n"
      "tomato: 200.5 220 240 260\n");
  REQUIRE(good.ok());
  REQUIRE(good->size() == 2);
  CHECK((*good)[1].name == "tomato");
  CHECK((*good)[1].box.x_min == doctest::Approx(200.5));

  CHECK(!parse_grounding_response("pepper 1 2 3 4").ok());         // no colon
  CHECK(!parse_grounding_response("pepper: 1 2 3").ok());          // three numbers
  CHECK(!parse_grounding_response("pepper: 1 2 3 4 5").ok());      // trailing number
  CHECK(!parse_grounding_response("pepper: 5 5 1 1").ok());        // degenerate box
  CHECK(parse_grounding_response("")->empty());
}

TEST_CASE("remote detection parses a scripted grounding response") {
  llm::MockScenario scenario;
  scenario.rules.push_back(
      {{}, std::nullopt, std::string("veg-ok"), "pepper: 100 120 140 160\ntomato: 1 2 3 4"});
  scenario.default_response = "not a detection";
  llm::BackendConfig config;
  config.kind = llm::BackendConfig::Kind::Mock;
  config.scenario = scenario;
  const llm::ChatClient client(config);

  const auto good = detect_objects_remote(client, "veg-ok");
  REQUIRE(good.ok());
  CHECK(good->size() == 2);

  const auto bad = detect_objects_remote(client, "other-scene");
  REQUIRE(!bad.ok());
  CHECK(bad.error().code == "response_parse");
}
