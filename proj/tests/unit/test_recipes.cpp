#include <cmath>

#include "doctest.h"

#include "souschef/recipes.hpp"

using namespace souschef;
using namespace souschef::rag;

namespace {

llm::Embedder hashed_embedder() {
  llm::BackendConfig config;
  config.kind = llm::BackendConfig::Kind::Mock;
  return llm::Embedder(config);
}

}  // namespace

TEST_CASE("the fixture corpus holds the three salads") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  REQUIRE(recipes->size() == 3);
  CHECK((*recipes)[0].name == "Vegetable Salad");
  CHECK((*recipes)[1].name == "Russian Salad");
  CHECK((*recipes)[2].name == "Fruit Salad");
  CHECK((*recipes)[1].prep.at("mayonnaise") == PrepRule::Pour);
  CHECK((*recipes)[2].prep.at("grape") == PrepRule::Place);
  for (const auto& r : recipes.value()) {
    CHECK(!r.ingredients.empty());
    CHECK(!r.steps.empty());
    CHECK(r.mix);
  }
}

TEST_CASE("recipe documents are validated") {
  CHECK(parse_recipes(R"([{"name": "X", "ingredients": [], "steps": ["s"]}])").error().code ==
        DocError::Code::Parse);
  CHECK(parse_recipes(R"([{"name": "X", "ingredients": ["a"], "steps": []}])").error().code ==
        DocError::Code::Parse);
  const auto dup = parse_recipes(R"([
    {"name": "Fruit Salad", "ingredients": ["a"], "steps": ["s"]},
    {"name": "Fruit Salad", "ingredients": ["b"], "steps": ["s"]}
  ])");
  REQUIRE(!dup.ok());
  CHECK(dup.error().code == DocError::Code::Duplicate);
  CHECK(!parse_recipes(R"([{"name": "X", "ingredients": ["a"], "steps": ["s"], "typo": 1}])")
             .ok());
}

TEST_CASE("indexing embeds one unit vector per recipe, deterministically") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  const auto embedder = hashed_embedder();
  const auto a = RecipeStore::build(recipes.value(), embedder, nullptr);
  const auto b = RecipeStore::build(recipes.value(), embedder, nullptr);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  REQUIRE(a->vectors().size() == 3);
  CHECK(a->vectors() == b->vectors());
  for (const auto& v : a->vectors()) {
    double norm = 0;
    for (double x : v) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  }
}

TEST_CASE("retrieve: canonical phrasings rank their own salad first") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  const auto embedder = hashed_embedder();
  const auto store = RecipeStore::build(recipes.value(), embedder, nullptr);
  REQUIRE(store.ok());

  const std::vector<std::pair<std::string, std::string>> cases = {
      {"please make me a fruit salad", "Fruit Salad"},
      {"I would like a vegetable salad", "Vegetable Salad"},
      {"could you prepare a russian salad for me", "Russian Salad"},
  };
  for (const auto& [query, expected] : cases) {
    const auto results = store->retrieve(query, 1);
    REQUIRE(results.ok());
    REQUIRE(results->size() == 1);
    CHECK(results->front().recipe.name == expected);
  }
}

TEST_CASE("retrieve: querying with a recipe's own indexed text scores 1") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  const auto embedder = hashed_embedder();
  const auto store = RecipeStore::build(recipes.value(), embedder, nullptr);
  REQUIRE(store.ok());
  for (const auto& recipe : store->recipes()) {
    const auto results = store->retrieve(RecipeStore::index_text(recipe), 1);
    REQUIRE(results.ok());
    CHECK(results->front().recipe.name == recipe.name);
    CHECK(std::abs(results->front().score - 1.0) < 1e-9);
  }
}

TEST_CASE("retrieve: k larger than the corpus returns everything, sorted") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  const auto embedder = hashed_embedder();
  const auto store = RecipeStore::build(recipes.value(), embedder, nullptr);
  REQUIRE(store.ok());
  const auto results = store->retrieve("a salad with mayonnaise and potato", 10);
  REQUIRE(results.ok());
  REQUIRE(results->size() == 3);
  CHECK((*results)[0].score >= (*results)[1].score);
  CHECK((*results)[1].score >= (*results)[2].score);
  CHECK((*results)[0].recipe.name == "Russian Salad");
  for (const auto& r : results.value()) {
    CHECK(r.score <= 1.0);
    CHECK(r.score >= -1.0);
  }
}

TEST_CASE("retrieve: empty store reports EmptyStore") {
  const auto embedder = hashed_embedder();
  const auto store = RecipeStore::build({}, embedder, nullptr);
  REQUIRE(store.ok());
  const auto results = store->retrieve("anything", 1);
  REQUIRE(!results.ok());
  CHECK(results.error().code == RagError::Code::EmptyStore);
}

TEST_CASE("retrieval is a pure function of corpus, query, and k") {
  const auto recipes = load_recipes("assets/recipes/recipes.json");
  REQUIRE(recipes.ok());
  const auto embedder = hashed_embedder();
  const auto store = RecipeStore::build(recipes.value(), embedder, nullptr);
  REQUIRE(store.ok());
  const auto a = store->retrieve("make me a salad", 3);
  const auto b = store->retrieve("make me a salad", 3);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  for (std::size_t i = 0; i < a->size(); ++i) {
    CHECK((*a)[i].recipe.name == (*b)[i].recipe.name);
    CHECK((*a)[i].score == (*b)[i].score);
  }
}
