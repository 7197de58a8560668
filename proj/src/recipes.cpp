#include "souschef/recipes.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace souschef::rag {

namespace {

using nlohmann::json;

DocError doc_error(DocError::Code code, std::string field, std::string message) {
  return {code, std::move(field), std::move(message)};
}

}  // namespace

const char* to_string(PrepRule r) {
  switch (r) {
    case PrepRule::Cut: return "cut";
    case PrepRule::Pour: return "pour";
    case PrepRule::Place: return "place";
  }
  return "?";
}

Result<std::vector<Recipe>, DocError> parse_recipes(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    return doc_error(DocError::Code::Parse, "", "recipe document is not a JSON array");

  std::vector<Recipe> recipes;
  for (const auto& entry : j) {
    if (!entry.is_object())
      return doc_error(DocError::Code::Parse, "", "recipe entry is not a JSON object");
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      const std::string& key = it.key();
      if (key != "name" && key != "ingredients" && key != "steps" && key != "prep" &&
          key != "mix")
        return doc_error(DocError::Code::Parse, key, "unknown recipe field");
    }
    Recipe r;
    if (!entry.contains("name") || !entry.at("name").is_string())
      return doc_error(DocError::Code::Parse, "name", "recipe needs a name");
    r.name = entry.at("name").get<std::string>();
    for (const auto& other : recipes)
      if (other.name == r.name)
        return doc_error(DocError::Code::Duplicate, "name", "duplicate recipe '" + r.name + "'");

    if (!entry.contains("ingredients") || !entry.at("ingredients").is_array() ||
        entry.at("ingredients").empty())
      return doc_error(DocError::Code::Parse, "ingredients",
                       "recipe '" + r.name + "' needs a nonempty ingredients list");
    for (const auto& ing : entry.at("ingredients")) {
      if (!ing.is_string())
        return doc_error(DocError::Code::Parse, "ingredients", "ingredient must be a string");
      r.ingredients.push_back(ing.get<std::string>());
    }
    if (!entry.contains("steps") || !entry.at("steps").is_array() || entry.at("steps").empty())
      return doc_error(DocError::Code::Parse, "steps",
                       "recipe '" + r.name + "' needs nonempty steps");
    for (const auto& s : entry.at("steps")) {
      if (!s.is_string())
        return doc_error(DocError::Code::Parse, "steps", "step must be a string");
      r.steps.push_back(s.get<std::string>());
    }
    if (entry.contains("prep")) {
      if (!entry.at("prep").is_object())
        return doc_error(DocError::Code::Parse, "prep", "prep must be an object");
      for (auto it = entry.at("prep").begin(); it != entry.at("prep").end(); ++it) {
        const std::string rule = it.value().is_string() ? it.value().get<std::string>() : "";
        if (rule == "cut")
          r.prep[it.key()] = PrepRule::Cut;
        else if (rule == "pour")
          r.prep[it.key()] = PrepRule::Pour;
        else if (rule == "place")
          r.prep[it.key()] = PrepRule::Place;
        else
          return doc_error(DocError::Code::Parse, "prep",
                           "unknown prep rule '" + rule + "' for '" + it.key() + "'");
      }
    }
    if (entry.contains("mix")) {
      if (!entry.at("mix").is_boolean())
        return doc_error(DocError::Code::Parse, "mix", "mix must be a boolean");
      r.mix = entry.at("mix").get<bool>();
    }
    recipes.push_back(std::move(r));
  }
  return recipes;
}

Result<std::vector<Recipe>, DocError> load_recipes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return doc_error(DocError::Code::Io, "", "cannot open recipe file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_recipes(buf.str());
}

std::string RecipeStore::index_text(const Recipe& recipe) {
  std::string text = recipe.name;
  text += '\n';
  for (const auto& i : recipe.ingredients) {
    text += i;
    text += ' ';
  }
  text += '\n';
  for (const auto& s : recipe.steps) {
    text += s;
    text += '\n';
  }
  return text;
}

Result<RecipeStore, RagError> RecipeStore::build(std::vector<Recipe> recipes,
                                                 const llm::Embedder& embedder,
                                                 llm::Transcript* transcript) {
  RecipeStore store;
  store.recipes_ = std::move(recipes);
  store.embedder_ = &embedder;
  if (store.recipes_.empty()) return store;  // retrieval will report EmptyStore

  std::vector<std::string> texts;
  texts.reserve(store.recipes_.size());
  for (const auto& r : store.recipes_) texts.push_back(index_text(r));
  auto vectors = embedder.embed(texts, transcript, "embedding");
  if (!vectors.ok())
    return RagError{RagError::Code::Backend,
                    std::string(llm::to_string(vectors.error().code)) + ": " +
                        vectors.error().message};
  store.vectors_ = std::move(vectors).value();
  return store;
}

Result<std::vector<RetrievalResult>, RagError> RecipeStore::retrieve(
    const std::string& query, std::size_t k, llm::Transcript* transcript) const {
  if (recipes_.empty()) return RagError{RagError::Code::EmptyStore, "no recipes indexed"};
  if (k == 0) k = 1;
  auto q = embedder_->embed({query}, transcript, "embedding");
  if (!q.ok())
    return RagError{RagError::Code::Backend,
                    std::string(llm::to_string(q.error().code)) + ": " + q.error().message};

  std::vector<RetrievalResult> results;
  results.reserve(recipes_.size());
  for (std::size_t i = 0; i < recipes_.size(); ++i)
    results.push_back({recipes_[i], llm::cosine(q->front(), vectors_[i])});
  std::stable_sort(results.begin(), results.end(),
                   [](const RetrievalResult& a, const RetrievalResult& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.recipe.name < b.recipe.name;
                   });
  if (results.size() > k) results.resize(k);
  return results;
}

}  // namespace souschef::rag
