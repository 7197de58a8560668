#include "souschef/cli_app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "souschef/eval.hpp"
#include "souschef/pipeline.hpp"

namespace souschef::cli {

namespace {

int outcome_exit_code(flow::Outcome o) {
  switch (o) {
    case flow::Outcome::Completed: return 0;
    case flow::Outcome::Refused: return 3;
    case flow::Outcome::PlanParseFailed: return 4;
    case flow::Outcome::CodeParseFailed: return 5;
    case flow::Outcome::ExecutionFailed: return 6;
    case flow::Outcome::GoalNotMet: return 7;
  }
  return 1;
}

int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 2;
}

void apply_backend_override(flow::PipelineConfig& config, const std::string& backend) {
  if (backend == "mock") {
    config.chat.kind = llm::BackendConfig::Kind::Mock;
    config.embed.kind = llm::BackendConfig::Kind::Mock;
    config.vision.kind = flow::VisionConfig::Kind::Sim;
  } else if (backend == "remote") {
    if (!config.chat.base_url.empty()) config.chat.kind = llm::BackendConfig::Kind::Remote;
    if (!config.embed.base_url.empty()) config.embed.kind = llm::BackendConfig::Kind::Remote;
    if (!config.vision.remote.base_url.empty())
      config.vision.kind = flow::VisionConfig::Kind::Remote;
  }
}

void print_state_summary(const sim::WorldState& state, std::ostream& out) {
  out << "objects:\n";
  for (const auto& [name, obj] : state.objects) {
    if (obj.kind == sim::ObjectKind::Fixture) continue;
    out << "  " << name << ": " << sim::to_string(obj.location.place) << ", "
        << sim::to_string(obj.state) << "\n";
  }
  out << "bowl contents:";
  for (const auto& c : state.bowl_contents) out << " " << c;
  out << "\nbowl mixed: " << (state.bowl_mixed ? "yes" : "no") << "\n";
}

bool write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) return false;
  out << text;
  return true;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"souschef: a language-driven two-arm kitchen simulator and pipeline harness"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir = "out";
  std::string backend;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "pipeline config file (JSON)");
  app.add_option("--out-dir", out_dir, "directory for traces and reports");
  app.add_option("--backend", backend, "override backend kind: mock or remote")
      ->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* cmd_run = app.add_subcommand("run", "run one request through the pipeline");
  std::string request, scene_path;
  cmd_run->add_option("request", request, "natural-language request")->required();
  cmd_run->add_option("--scene", scene_path, "scene document")->required();

  auto* cmd_codegen = app.add_subcommand("eval-codegen", "code-generation campaign");
  int cases = 99;
  bool execute = false;
  std::string codegen_scene;
  cmd_codegen->add_option("--cases", cases, "number of requests (default 99, exact thirds)");
  cmd_codegen->add_flag("--execute", execute, "also execute and check the goal per request");
  cmd_codegen->add_option("--scene", codegen_scene, "scene document")->required();

  auto* cmd_vision = app.add_subcommand("eval-vision", "vision metric campaign");
  int vision_cases = 100;
  double miss_rate = 0.0, mislabel_rate = 0.0;
  bool complete_only = false;
  std::string manifest_path, calibration_path, recipe_filter, emit_dir;
  cmd_vision->add_option("--cases", vision_cases, "number of synthesized scenes");
  cmd_vision->add_option("--miss-rate", miss_rate, "probability a detection is dropped");
  cmd_vision->add_option("--mislabel-rate", mislabel_rate,
                         "probability a missing ingredient's caption lands on a present object");
  cmd_vision->add_flag("--complete-only", complete_only, "synthesize only complete scenes");
  cmd_vision->add_option("--manifest", manifest_path,
                         "run over a scene manifest instead of synthesizing");
  cmd_vision->add_option("--calibration", calibration_path,
                         "camera calibration for synthesized scenes");
  cmd_vision->add_option("--recipe", recipe_filter, "restrict synthesized scenes to one recipe");
  cmd_vision->add_option("--emit", emit_dir, "write synthesized scenes + manifest here");

  auto* cmd_sim = app.add_subcommand("sim-exec", "execute a program file against a scene");
  std::string program_path, sim_scene_path;
  cmd_sim->add_option("--program", program_path, "program text file")->required();
  cmd_sim->add_option("--scene", sim_scene_path, "scene document")->required();

  auto* cmd_geom = app.add_subcommand("geom-check", "verify a calibration file round-trips");
  std::string geom_calibration;
  cmd_geom->add_option("--calibration", geom_calibration, "calibration file")->required();

  std::vector<char*> argv;
  std::vector<std::string> owned = args;
  std::string program_name = "souschef";
  argv.push_back(program_name.data());
  for (auto& a : owned) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // geom-check and manifest-driven eval-vision need no pipeline config.
  if (cmd_geom->parsed()) {
    auto model = geom::load_calibration(geom_calibration);
    if (!model.ok())
      return fail(std::string(geom::to_string(model.error().code)) + ": " +
                  model.error().message);
    const double width = 2.0 * model->intrinsics.cx();
    const double height = 2.0 * model->intrinsics.cy();
    double max_residual = 0.0;
    for (int gx = 1; gx <= 7; ++gx) {
      for (int gy = 1; gy <= 7; ++gy) {
        const geom::PixelPoint target{width * gx / 8.0, height * gy / 8.0};
        const auto cam =
            geom::pixel_to_camera(model->intrinsics, target, model->table_z_camera);
        if (!cam.ok()) return fail(cam.error().message);
        const geom::WorldPoint w = geom::camera_to_world(model->extrinsics, cam.value());
        const auto projected = geom::world_to_pixel(model.value(), w);
        if (!projected.ok()) return fail(projected.error().message);
        const auto raw = geom::distort_pixel(model->distortion, projected->pixel);
        if (!raw.ok()) return fail(raw.error().message);
        const auto back = geom::pixel_to_world(model.value(), raw.value());
        if (!back.ok()) return fail(back.error().message);
        max_residual = std::max({max_residual, std::abs(back->x - w.x),
                                 std::abs(back->y - w.y), std::abs(back->z - w.z)});
      }
    }
    std::cout << "max round-trip residual: " << max_residual << " m\n";
    if (max_residual < 1e-6) {
      std::cout << "geom-check: ok\n";
      return 0;
    }
    std::cout << "geom-check: residual above 1e-6\n";
    return 1;
  }

  if (cmd_sim->parsed()) {
    std::ifstream in(program_path);
    if (!in) return fail("cannot open program file: " + program_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto program = lang::parse_program(buf.str());
    if (!program.ok()) {
      std::cerr << lang::to_string(program.error().code) << " at line "
                << program.error().location.line << ", column " << program.error().location.column
                << ": " << program.error().message << "\n";
      return 5;
    }
    auto scene = sim::load_scene(sim_scene_path);
    if (!scene.ok()) return fail(scene.error().message);

    std::set<std::string> known;
    for (const auto& [name, obj] : scene->state.objects)
      if (obj.kind != sim::ObjectKind::Fixture) known.insert(name);
    const auto precheck = lang::validate_against_scene(program.value(), known);
    if (!precheck.ok()) {
      for (const auto& v : precheck.violations)
        std::cerr << lang::to_string(v.code) << " at line " << v.location.line << ": "
                  << v.message << "\n";
      return 5;
    }

    const auto result = sim::execute_program(scene->state, program.value());
    std::string trace_text;
    for (const auto& e : result.trace.events) {
      nlohmann::json line{{"call_index", e.call_index},
                          {"call", e.call},
                          {"phase", e.phase},
                          {"note", e.note}};
      trace_text += line.dump() + "\n";
    }
    write_text(std::filesystem::path(out_dir) / "sim_trace.jsonl", trace_text);
    if (!result.ok()) {
      std::cerr << sim::to_string(result.error->error.code) << " at call "
                << result.error->call_index << ": " << result.error->error.message << "\n";
      print_state_summary(result.state, std::cout);
      return 6;
    }
    print_state_summary(result.state, std::cout);
    return 0;
  }

  // Remaining subcommands need the pipeline config.
  if (config_path.empty()) return fail("--config is required for this subcommand");
  auto config = flow::load_config(config_path);
  if (!config.ok())
    return fail(std::string(to_string(config.error().code)) +
                (config.error().field.empty() ? "" : " (" + config.error().field + ")") + ": " +
                config.error().message);
  if (!backend.empty()) apply_backend_override(config.value(), backend);
  if (seed_set) config.value().seed = seed;

  if (cmd_vision->parsed()) {
    eval::VisionCampaignOptions options;
    options.cases = vision_cases;
    options.miss_rate = miss_rate;
    options.mislabel_rate = mislabel_rate;
    options.seed = seed_set ? seed : config->seed;
    options.complete_only = complete_only;
    options.recipe_filter = recipe_filter;
    if (!emit_dir.empty()) options.emit_dir = emit_dir;

    eval::EvalReport report;
    if (!manifest_path.empty()) {
      auto loaded = eval::run_vision_campaign_from_manifest(manifest_path, config->recipes,
                                                            options);
      if (!loaded.ok()) return fail(loaded.error().message);
      report = loaded.value();
    } else {
      if (calibration_path.empty())
        return fail("--calibration is required when synthesizing scenes");
      auto camera = geom::load_calibration(calibration_path);
      if (!camera.ok()) return fail(camera.error().message);
      report = eval::run_vision_campaign(config->recipes, camera.value(), options);
    }
    const auto saved = report.save(out_dir);
    if (!saved.ok()) return fail(saved.error().message);
    std::cout << report.summary_text();
    return 0;
  }

  auto pipeline = flow::Pipeline::create(config.value());
  if (!pipeline.ok()) return fail(pipeline.error());

  if (cmd_run->parsed()) {
    auto scene = sim::load_scene(scene_path);
    if (!scene.ok()) return fail(scene.error().message);
    const auto trace = pipeline->run(request, scene.value());
    write_text(std::filesystem::path(out_dir) / "trace.jsonl", trace.to_jsonl());
    std::cout << flow::to_string(trace.outcome)
              << (trace.outcome_detail.empty() ? "" : ": " + trace.outcome_detail) << "\n";
    return outcome_exit_code(trace.outcome);
  }

  if (cmd_codegen->parsed()) {
    auto scene = sim::load_scene(codegen_scene);
    if (!scene.ok()) return fail(scene.error().message);
    const auto report = eval::run_codegen_campaign(pipeline.value(), scene.value(), cases,
                                                   seed_set ? seed : config->seed, execute);
    const auto saved = report.save(out_dir);
    if (!saved.ok()) return fail(saved.error().message);
    std::cout << report.summary_text();
    return 0;
  }

  return fail("no subcommand handled");
}

}  // namespace souschef::cli
