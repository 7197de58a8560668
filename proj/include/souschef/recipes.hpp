#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "souschef/llm_client.hpp"
#include "souschef/result.hpp"

namespace souschef::rag {

// How an ingredient is expected to end up in the bowl. Drives the goal
// check after execution.
enum class PrepRule { Cut, Pour, Place };

const char* to_string(PrepRule r);

struct Recipe {
  std::string name;
  std::vector<std::string> ingredients;  // lowercase tokens
  std::vector<std::string> steps;
  // Per-ingredient preparation rules; ingredients without an entry default
  // to Cut. mix tells whether the bowl must be tossed at the end.
  std::map<std::string, PrepRule> prep;
  bool mix = true;
  bool operator==(const Recipe&) const = default;
};

// Recipe document: JSON array of objects with fields name, ingredients,
// steps, and optional prep / mix.
Result<std::vector<Recipe>, DocError> parse_recipes(const std::string& json_text);
Result<std::vector<Recipe>, DocError> load_recipes(const std::filesystem::path& path);

struct RetrievalResult {
  Recipe recipe;
  double score = 0;  // cosine similarity in [-1, 1]
};

struct RagError {
  enum class Code { EmptyStore, Backend };
  Code code;
  std::string message;
};

// Recipes plus their embedding vectors. Immutable once built; retrieval is
// a pure function of (corpus, query, k).
class RecipeStore {
 public:
  // Embeds name + ingredients + steps per recipe. The embedder must outlive
  // the store.
  static Result<RecipeStore, RagError> build(std::vector<Recipe> recipes,
                                             const llm::Embedder& embedder,
                                             llm::Transcript* transcript = nullptr);

  // Top-k recipes by cosine similarity, ties broken by name.
  Result<std::vector<RetrievalResult>, RagError> retrieve(
      const std::string& query, std::size_t k, llm::Transcript* transcript = nullptr) const;

  const std::vector<Recipe>& recipes() const { return recipes_; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }
  static std::string index_text(const Recipe& recipe);

 private:
  std::vector<Recipe> recipes_;
  std::vector<std::vector<double>> vectors_;
  const llm::Embedder* embedder_ = nullptr;
};

}  // namespace souschef::rag
