#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stinger/analysis.hpp"
#include "stinger/augment.hpp"
#include "stinger/cli.hpp"
#include "stinger/error.hpp"
#include "stinger/experiment.hpp"
#include "stinger/fixture.hpp"
#include "stinger/metrics.hpp"
#include "stinger/model.hpp"

namespace py = pybind11;
using namespace stinger;

namespace {

py::dict report_dict(const EvaluationReport& r) {
    return py::module_::import("json").attr("loads")(to_json(r).dump());
}

std::vector<std::string> feature_names(const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& f : d.schema()) out.push_back(f.name);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bluebottle presence toolkit";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("cells", &Dataset::cells)
        .def_property_readonly("labels", &Dataset::labels)
        .def_property_readonly("beaches", &Dataset::beaches)
        .def_property_readonly("dates", &Dataset::dates)
        .def_property_readonly("features", &feature_names)
        .def_property_readonly("synthetic",
                               [](const Dataset& d) {
                                   std::vector<bool> out(d.size(), false);
                                   for (std::size_t i = 0; i < d.origins().size(); ++i)
                                       out[i] = d.origins()[i] == Origin::synthetic;
                                   return out;
                               })
        .def("count", &Dataset::count, py::arg("label"))
        .def("__len__", &Dataset::size)
        .def("save", [](const Dataset& d, const std::filesystem::path& p, bool origin) { write_observations(p, d, origin); },
             py::arg("path"), py::arg("with_origin") = false);

    m.def("load_observations",
          [](const std::filesystem::path& p, bool drop) {
              LoadOptions o;
              o.drop_incomplete_rows = drop;
              return load_observations(p, FeatureSchema::study(), o);
          },
          py::arg("path"), py::arg("drop_incomplete_rows") = false);
    m.def("generate_fixture",
          [](std::size_t n, double prevalence, double overlap, Seed seed) {
              return generate_fixture({n, prevalence, overlap, seed});
          },
          py::arg("n") = 2000, py::arg("prevalence") = 0.06, py::arg("overlap") = 0.5, py::arg("seed") = 0);
    m.def("split_train_test",
          [](const Dataset& d, double fraction, Seed seed) { return split_train_test(d, {fraction, seed}); },
          py::arg("data"), py::arg("train_fraction") = 0.6, py::arg("seed") = 0);
    m.def("bin_direction", [](double deg) { return std::string(to_string(bin_direction(deg))); }, py::arg("degrees"));

    m.def("smote_nc", [](const Dataset& d, std::size_t k, Seed seed) { return smote_nc(d, {k, seed}); },
          py::arg("train"), py::arg("k_neighbors") = 5, py::arg("seed") = 0);
    m.def("random_undersample", &random_undersample, py::arg("train"), py::arg("seed") = 0);
    m.def("synthetic_negative",
          [](const Dataset& train, Seed seed) {
              ResamplePlan plan = ResamplePlan::parse("synthneg-copula");
              plan.seed = seed;
              return apply_plan(train, plan);
          },
          py::arg("train"), py::arg("seed") = 0);
    m.def("resample",
          [](const Dataset& train, const std::string& strategy, Seed seed) {
              ResamplePlan plan = ResamplePlan::parse(strategy);
              plan.seed = seed;
              plan.gan.seed = seed;
              return apply_plan(train, plan);
          },
          py::arg("train"), py::arg("strategy"), py::arg("seed") = 0);

    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(to_string(t.kind())); })
        .def("predict",
             [](const TrainedModel& t, const Dataset& d) {
                 auto p = t.predict(d);
                 return py::make_tuple(p.scores, p.labels);
             },
             py::arg("data"))
        .def("importance", [](const TrainedModel& t, const Dataset& validation,
                              Seed seed) { return t.feature_importance(validation, seed); },
             py::arg("validation"), py::arg("seed") = 0)
        .def("save", &TrainedModel::save, py::arg("path"))
        .def_static("load", &TrainedModel::load, py::arg("path"));

    m.def("train",
          [](const std::string& kind, const Dataset& train, Seed seed, const std::string& params_json) {
              ModelParams p;
              if (!params_json.empty()) p.apply_overrides(nlohmann::json::parse(params_json));
              p.set_seed(seed);
              return train_model(parse_model_kind(kind), train, p);
          },
          py::arg("model"), py::arg("train"), py::arg("seed") = 0, py::arg("params_json") = "");

    m.def("confusion_matrix",
          [](const std::vector<int>& actual, const std::vector<int>& predicted) {
              const auto cm = confusion_matrix(actual, predicted);
              py::dict d;
              d["tp"] = cm.tp;
              d["tn"] = cm.tn;
              d["fp"] = cm.fp;
              d["fn"] = cm.fn;
              return d;
          },
          py::arg("actual"), py::arg("predicted"));
    m.def("roc_auc", [](const std::vector<int>& a, const std::vector<double>& s) { return roc_auc(a, s); },
          py::arg("actual"), py::arg("scores"));
    m.def("pr_curve",
          [](const std::vector<int>& a, const std::vector<double>& s) {
              std::vector<std::pair<double, double>> out;
              for (const auto& p : pr_curve(a, s)) out.emplace_back(p.x, p.y);
              return out;
          },
          py::arg("actual"), py::arg("scores"));
    m.def("evaluate",
          [](const std::vector<int>& a, const std::vector<int>& p, const std::vector<double>& s) {
              return report_dict(evaluate(a, p, s));
          },
          py::arg("actual"), py::arg("predicted"), py::arg("scores"));

    m.def("pca",
          [](const Matrix& rows, std::size_t k) {
              const auto model = pca_fit(rows, k);
              return py::make_tuple(Matrix(model.transform(rows)), Matrix(model.axes),
                                    Eigen::VectorXd(model.explained_variance));
          },
          py::arg("rows"), py::arg("n_components") = 2);
    m.def("point_biserial", [](const std::vector<int>& b, const std::vector<double>& v) { return point_biserial(b, v); },
          py::arg("binary"), py::arg("values"));

    m.def("run_experiment",
          [](const std::string& config_json, const std::filesystem::path& out, bool write) {
              ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
              cfg.out = out;
              const auto r = run_experiment(cfg, write);
              py::dict d;
              for (const auto& cell : r.cells)
                  d[py::str(cell.strategy + "/" + std::string(to_string(cell.model)))] =
                      py::module_::import("json").attr("loads")(aggregate_json(cell, r.feature_names).dump());
              return d;
          },
          py::arg("config_json"), py::arg("out") = "out", py::arg("write") = true);

    m.def("cli",
          [](const std::vector<std::string>& args) {
              std::vector<const char*> argv = {"stinger"};
              for (const auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"));
}
