#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "souschef/eval.hpp"
#include "souschef/pipeline.hpp"

namespace py = pybind11;
using namespace souschef;

namespace {

// Unwrap a Result or raise ValueError with the error rendered as text.
template <typename T, typename E, typename F>
T unwrap(Result<T, E> result, F&& describe) {
  if (!result.ok()) throw py::value_error(describe(result.error()));
  return std::move(result).value();
}

std::string describe_geometry_error(const geom::GeometryError& e) {
  return std::string(geom::to_string(e.code)) + ": " + e.message;
}

std::string describe_doc_error(const DocError& e) {
  return std::string(to_string(e.code)) + (e.field.empty() ? "" : " (" + e.field + ")") + ": " +
         e.message;
}

std::string describe_validation_error(const lang::ValidationError& e) {
  return std::string(lang::to_string(e.code)) + " at line " + std::to_string(e.location.line) +
         ", column " + std::to_string(e.location.column) + ": " + e.message;
}

geom::PixelPoint to_pixel(const std::pair<double, double>& p) { return {p.first, p.second}; }

py::dict world_state_summary(const sim::WorldState& state) {
  py::dict objects;
  for (const auto& [name, obj] : state.objects) {
    if (obj.kind == sim::ObjectKind::Fixture) continue;
    py::dict entry;
    entry["kind"] = sim::to_string(obj.kind);
    entry["state"] = sim::to_string(obj.state);
    entry["place"] = sim::to_string(obj.location.place);
    entry["was_cut"] = obj.was_cut;
    objects[py::str(name)] = entry;
  }
  py::dict out;
  out["objects"] = objects;
  out["bowl_contents"] = state.bowl_contents;
  out["bowl_mixed"] = state.bowl_mixed;
  out["history"] = state.history;
  return out;
}

}  // namespace

PYBIND11_MODULE(souschef, m) {
  m.doc() = "Two-arm kitchen simulator with a language-driven cooking pipeline";

  // ---- camera geometry ----
  py::class_<geom::DistortionCoefficients>(m, "DistortionCoefficients")
      .def(py::init([](double k1, double k2, double k3, double p1, double p2) {
             return geom::DistortionCoefficients{k1, k2, k3, p1, p2};
           }),
           py::arg("k1") = 0.0, py::arg("k2") = 0.0, py::arg("k3") = 0.0, py::arg("p1") = 0.0,
           py::arg("p2") = 0.0)
      .def_readwrite("k1", &geom::DistortionCoefficients::k1)
      .def_readwrite("k2", &geom::DistortionCoefficients::k2)
      .def_readwrite("k3", &geom::DistortionCoefficients::k3)
      .def_readwrite("p1", &geom::DistortionCoefficients::p1)
      .def_readwrite("p2", &geom::DistortionCoefficients::p2);

  py::class_<geom::CameraModel>(m, "CameraModel")
      .def_property_readonly("table_z_camera",
                             [](const geom::CameraModel& m_) { return m_.table_z_camera; });

  py::enum_<geom::TangentialForm>(m, "TangentialForm")
      .value("STANDARD", geom::TangentialForm::Standard)
      .value("AS_PRINTED", geom::TangentialForm::AsPrinted);

  m.def(
      "undistort_pixel",
      [](const geom::DistortionCoefficients& d, std::pair<double, double> p,
         geom::TangentialForm form) {
        const auto u = geom::undistort_pixel(d, to_pixel(p), form);
        return std::make_pair(u.x, u.y);
      },
      py::arg("coefficients"), py::arg("pixel"),
      py::arg("form") = geom::TangentialForm::Standard);
  m.def(
      "distort_pixel",
      [](const geom::DistortionCoefficients& d, std::pair<double, double> p,
         geom::TangentialForm form) {
        const auto r = unwrap(geom::distort_pixel(d, to_pixel(p), form), describe_geometry_error);
        return std::make_pair(r.x, r.y);
      },
      py::arg("coefficients"), py::arg("pixel"),
      py::arg("form") = geom::TangentialForm::Standard);
  m.def("load_calibration", [](const std::filesystem::path& path) {
    return unwrap(geom::load_calibration(path), describe_geometry_error);
  });
  m.def("pixel_to_world", [](const geom::CameraModel& model, std::pair<double, double> p) {
    const auto w = unwrap(geom::pixel_to_world(model, to_pixel(p)), describe_geometry_error);
    return std::make_tuple(w.x, w.y, w.z);
  });
  m.def("world_to_pixel", [](const geom::CameraModel& model, std::tuple<double, double, double> w) {
    const auto p = unwrap(
        geom::world_to_pixel(model, {std::get<0>(w), std::get<1>(w), std::get<2>(w)}),
        describe_geometry_error);
    return std::make_tuple(p.pixel.x, p.pixel.y, p.z_c);
  });

  // ---- action language ----
  py::class_<lang::ActionProgram>(m, "ActionProgram")
      .def("__len__", [](const lang::ActionProgram& p) { return p.calls.size(); })
      .def("__eq__", [](const lang::ActionProgram& a,
                        const lang::ActionProgram& b) { return a == b; })
      .def("serialize", [](const lang::ActionProgram& p) { return lang::serialize_program(p); });

  m.def("parse_plan", [](const std::string& text) {
    const auto plan = unwrap(lang::parse_plan(text), describe_validation_error);
    return plan.steps;
  });
  m.def("parse_program", [](const std::string& text) {
    return unwrap(lang::parse_program(text), describe_validation_error);
  });
  m.def("serialize_program", &lang::serialize_program);
  m.def("validate_against_scene",
        [](const lang::ActionProgram& program, const std::vector<std::string>& known) {
          const auto check = lang::validate_against_scene(
              program, std::set<std::string>(known.begin(), known.end()));
          std::vector<std::string> messages;
          for (const auto& v : check.violations) messages.push_back(v.message);
          return messages;
        });

  // ---- kitchen simulator ----
  py::class_<sim::Scene>(m, "Scene")
      .def_property_readonly("camera", [](const sim::Scene& s) { return s.camera; })
      .def_property_readonly("id", [](const sim::Scene& s) { return s.id; })
      .def("summary", [](const sim::Scene& s) { return world_state_summary(s.state); })
      .def("list_objects", [](const sim::Scene& s) { return sim::sim_list_objects(s.state); })
      .def("execute",
           [](const sim::Scene& s, const lang::ActionProgram& program) {
             const auto result = sim::execute_program(s.state, program);
             py::dict out;
             out["ok"] = result.ok();
             out["state"] = world_state_summary(result.state);
             py::list events;
             for (const auto& e : result.trace.events) {
               py::dict ev;
               ev["call_index"] = e.call_index;
               ev["call"] = e.call;
               ev["phase"] = e.phase;
               ev["note"] = e.note;
               events.append(ev);
             }
             out["trace"] = events;
             if (!result.ok()) {
               out["error"] = std::string(sim::to_string(result.error->error.code)) + ": " +
                              result.error->error.message;
               out["failed_call_index"] = result.error->call_index;
             }
             return out;
           })
      .def("detect",
           [](const sim::Scene& s, double miss_rate, double mislabel_rate, std::uint64_t seed,
              const std::vector<std::string>& required) {
             vision::ErrorInjection injection{miss_rate, mislabel_rate, seed};
             const auto detections =
                 vision::detect_objects_sim(s.state, s.camera, injection, required);
             if (!detections.ok()) throw py::value_error(detections.error().message);
             py::list out;
             for (const auto& d : detections.value()) {
               py::dict e;
               e["name"] = d.name;
               e["box"] = std::make_tuple(d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max);
               out.append(e);
             }
             return out;
           },
           py::arg("miss_rate") = 0.0, py::arg("mislabel_rate") = 0.0, py::arg("seed") = 0,
           py::arg("required") = std::vector<std::string>{});

  m.def("load_scene", [](const std::filesystem::path& path) {
    return unwrap(sim::load_scene(path), describe_doc_error);
  });

  // ---- retrieval ----
  m.def("retrieve_recipe",
        [](const std::filesystem::path& recipes_path, const std::string& query, std::size_t k) {
          static llm::Embedder embedder{llm::BackendConfig{}};  // mock/hashed
          auto recipes = unwrap(rag::load_recipes(recipes_path), describe_doc_error);
          auto store = rag::RecipeStore::build(std::move(recipes), embedder, nullptr);
          if (!store.ok()) throw py::value_error(store.error().message);
          auto results = store->retrieve(query, k, nullptr);
          if (!results.ok()) throw py::value_error(results.error().message);
          py::list out;
          for (const auto& r : results.value())
            out.append(py::make_tuple(r.recipe.name, r.score));
          return out;
        },
        py::arg("recipes_path"), py::arg("query"), py::arg("k") = 1);

  // ---- pipeline ----
  py::class_<flow::Pipeline>(m, "Pipeline")
      .def_static("from_config",
                  [](const std::filesystem::path& path) {
                    auto config = unwrap(flow::load_config(path), describe_doc_error);
                    auto pipeline = flow::Pipeline::create(std::move(config));
                    if (!pipeline.ok()) throw py::value_error(pipeline.error());
                    return std::move(pipeline).value();
                  })
      .def("run",
           [](const flow::Pipeline& pipeline, const std::string& request, const sim::Scene& scene,
              bool execute) {
             const auto trace = pipeline.run(
                 request, scene,
                 execute ? flow::Pipeline::Mode::Full : flow::Pipeline::Mode::ValidateOnly);
             py::dict out;
             out["outcome"] = flow::to_string(trace.outcome);
             out["detail"] = trace.outcome_detail;
             out["recipe"] = trace.retrieval ? trace.retrieval->recipe.name : "";
             out["detected"] = trace.detected;
             out["program"] =
                 trace.program ? lang::serialize_program(*trace.program) : std::string();
             out["final_state"] = world_state_summary(trace.final_state);
             out["jsonl"] = trace.to_jsonl();
             return out;
           },
           py::arg("request"), py::arg("scene"), py::arg("execute") = true);

  m.def("run_codegen_campaign",
        [](const std::filesystem::path& config_path, const std::filesystem::path& scene_path,
           int n, std::uint64_t seed, bool execute) {
          auto config = unwrap(flow::load_config(config_path), describe_doc_error);
          auto pipeline = flow::Pipeline::create(std::move(config));
          if (!pipeline.ok()) throw py::value_error(pipeline.error());
          auto scene = unwrap(sim::load_scene(scene_path), describe_doc_error);
          const auto report =
              eval::run_codegen_campaign(pipeline.value(), scene, n, seed, execute);
          py::dict out;
          for (const auto& [key, value] : report.aggregates) out[py::str(key)] = value;
          return out;
        },
        py::arg("config_path"), py::arg("scene_path"), py::arg("n") = 99, py::arg("seed") = 0,
        py::arg("execute") = true);
}
