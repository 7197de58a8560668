#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "souschef/pipeline.hpp"
#include "souschef/result.hpp"

namespace souschef::eval {

// Campaign report: per-case rows plus aggregates recomputable from them.
struct EvalReport {
  std::string campaign;
  std::string header_note;
  std::vector<nlohmann::json> rows;
  std::map<std::string, double> aggregates;
  nlohmann::json config_snapshot;

  std::string summary_text() const;
  // Writes <campaign>_rows.jsonl and <campaign>_summary.json under dir.
  Result<std::filesystem::path, DocError> save(const std::filesystem::path& dir) const;
  // Loads a saved report and verifies the stored aggregates against a
  // recomputation from the rows.
  static Result<EvalReport, DocError> load(const std::filesystem::path& summary_path);
};

// Recomputes the aggregates a campaign's rows imply (keyed by campaign id).
std::map<std::string, double> recompute_aggregates(const std::string& campaign,
                                                   const std::vector<nlohmann::json>& rows);

// Seeded request phrasings, one third per salad type; row i requests
// salads[i % 3], so any remainder lands on the first (vegetable) salad.
std::vector<std::string> request_pool(int n, std::uint64_t seed);

// Runs n requests through the pipeline against the given scene and reports
// the code-generation success rate. execute=false stops each session after
// parse+validate.
EvalReport run_codegen_campaign(const flow::Pipeline& pipeline, const sim::Scene& scene, int n,
                                std::uint64_t seed, bool execute);

struct VisionCampaignOptions {
  int cases = 100;
  double miss_rate = 0.0;
  double mislabel_rate = 0.0;
  std::uint64_t seed = 0;
  bool complete_only = false;  // otherwise alternating complete / missing
  std::string recipe_filter;   // restrict to one recipe by name
  std::filesystem::path emit_dir;  // when set, write scene docs + manifest here
};

// Synthesizes seeded scenes (half complete, half with one required
// ingredient removed), runs detection with injection, and scores the two
// groups separately.
EvalReport run_vision_campaign(const std::vector<rag::Recipe>& recipes,
                               const geom::CameraModel& camera,
                               const VisionCampaignOptions& options);

// Vision campaign over a manifest file pairing scene documents with recipes
// and completeness flags.
Result<EvalReport, DocError> run_vision_campaign_from_manifest(
    const std::filesystem::path& manifest_path, const std::vector<rag::Recipe>& recipes,
    const VisionCampaignOptions& options);

}  // namespace souschef::eval
