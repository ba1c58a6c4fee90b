#include "ofc/classifiers.hpp"
#include "ofc/error.hpp"
#include "ofc/metrics.hpp"
#include "ofc/mrmr.hpp"
#include "ofc/pipeline.hpp"
#include "ofc/report.hpp"
#include "ofc/shap.hpp"
#include "ofc/smote.hpp"
#include "ofc/split.hpp"
#include "ofc/synth.hpp"
#include "ofc/tabular.hpp"
#include "ofc/version.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

namespace py = pybind11;

namespace {

nlohmann::json parse_json(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ofc::ParseError(std::string(what) + ": " + e.what());
    }
}

ofc::HyperMap hyper_map_from_json(const std::string& text) {
    ofc::HyperMap map;
    if (text.empty()) return map;
    const nlohmann::json doc = parse_json(text, "hyperparameters");
    for (const auto& [key, value] : doc.items()) {
        if (value.is_number()) {
            map.emplace(key, value.get<double>());
        } else if (value.is_string()) {
            map.emplace(key, value.get<std::string>());
        } else {
            throw ofc::ValidationError("hyperparameter '" + key + "' must be number or string");
        }
    }
    return map;
}

py::object optional_to_py(const std::optional<double>& v) {
    if (v) return py::float_(*v);
    return py::none();
}

py::dict metric_set_to_dict(const ofc::MetricSet& set) {
    py::dict out;
    for (int i = 0; i < 6; ++i) {
        out[ofc::kMetricNames[i]] = optional_to_py(ofc::metric_field(set, i));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_ofckit, m) {
    m.doc() = "Ensemble-learning toolkit for food-challenge outcome prediction";
    m.attr("__version__") = ofc::kVersion;

    py::register_exception<ofc::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ofc::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ofc::UndefinedMetricError>(m, "UndefinedMetricError",
                                                      PyExc_ArithmeticError);

    py::class_<ofc::Table>(m, "Table")
        .def_property_readonly("n_rows", &ofc::Table::n_rows)
        .def_property_readonly("n_cols", &ofc::Table::n_cols)
        .def_property_readonly("feature_names", &ofc::Table::feature_names)
        .def("labels", &ofc::Table::labels01)
        .def("patient_id", &ofc::Table::patient_id, py::arg("row"))
        .def("subset", &ofc::Table::subset, py::arg("rows"))
        .def(
            "matrix",
            [](const ofc::Table& t, std::vector<std::string> columns) {
                if (columns.empty()) columns = t.feature_names();
                return t.matrix(columns);
            },
            py::arg("columns") = std::vector<std::string>{})
        .def("__len__", &ofc::Table::n_rows)
        .def("__repr__", [](const ofc::Table& t) {
            return "<ofckit.Table " + std::to_string(t.n_rows()) + " rows x " +
                   std::to_string(t.n_cols()) + " columns>";
        });

    m.def(
        "read_csv",
        [](const std::string& data, const std::string& schema) {
            return ofc::read_csv(data, ofc::read_schema(schema));
        },
        py::arg("data"), py::arg("schema"), "Load a CSV using a schema JSON file.");
    m.def(
        "write_csv",
        [](const ofc::Table& table, const std::string& path,
           const std::vector<std::string>& comments) { ofc::write_csv(table, path, comments); },
        py::arg("table"), py::arg("path"), py::arg("comments") = std::vector<std::string>{});
    m.def(
        "write_schema",
        [](const ofc::Table& table, const std::string& path) {
            ofc::write_schema(table.schema(), path);
        },
        py::arg("table"), py::arg("path"));
    m.def("drop_incomplete", &ofc::drop_incomplete, py::arg("table"));
    m.def("drop_columns", &ofc::drop_columns, py::arg("table"), py::arg("columns"));
    m.def("one_hot_encode", &ofc::one_hot_encode, py::arg("table"));
    m.def("normalize_censored", &ofc::normalize_censored, py::arg("token"));
    m.def("binarize", &ofc::binarize, py::arg("token"));

    m.def(
        "generate",
        [](const std::string& spec_json) {
            ofc::SynthSpec spec;
            if (!spec_json.empty()) {
                spec = ofc::SynthSpec::from_json(parse_json(spec_json, "synth spec"));
            }
            ofc::SynthResult result = ofc::generate(spec);
            return py::make_tuple(result.table, result.manifest().dump());
        },
        py::arg("spec_json") = std::string{},
        "Generate a synthetic dataset; returns (table, manifest JSON text).");

    py::class_<ofc::Partition>(m, "Partition")
        .def_readonly("feature_selection_rows", &ofc::Partition::feature_selection_rows)
        .def_readonly("test_rows", &ofc::Partition::test_rows)
        .def_readonly("fold_of_row", &ofc::Partition::fold_of_row)
        .def_readonly("folds", &ofc::Partition::folds)
        .def("trainval_rows", &ofc::Partition::trainval_rows)
        .def("fold_rows", &ofc::Partition::fold_rows, py::arg("fold"));

    m.def(
        "make_partition",
        [](const ofc::Table& table, double feature_selection_fraction, double test_fraction,
           int folds, std::uint64_t seed, int shuffle_index) {
            ofc::PartitionPlan plan;
            plan.feature_selection_fraction = feature_selection_fraction;
            plan.test_fraction = test_fraction;
            plan.folds = folds;
            plan.seed = seed;
            plan.validate();
            return ofc::make_partition(table, plan, shuffle_index);
        },
        py::arg("table"), py::arg("feature_selection_fraction") = 0.2,
        py::arg("test_fraction") = 0.2, py::arg("folds") = 3, py::arg("seed") = 0,
        py::arg("shuffle_index") = 0, "Patient-wise split of one shuffle.");

    m.def(
        "mrmr_rank",
        [](const ofc::Table& table, std::vector<std::string> features, int bins) {
            if (features.empty()) features = table.feature_names();
            return ofc::mrmr_rank(table, features, bins).ordered;
        },
        py::arg("table"), py::arg("features") = std::vector<std::string>{}, py::arg("bins") = 10,
        "Greedy mRMR ranking; returns ordered (feature, score) pairs.");
    m.def(
        "mutual_information",
        [](const std::vector<double>& x, const std::vector<double>& y, int bins) {
            return ofc::mutual_information(x, y, bins).value;
        },
        py::arg("x"), py::arg("y"), py::arg("bins") = 10);

    m.def(
        "smote",
        [](const ofc::Table& table, int k_neighbors, std::uint64_t seed) {
            return ofc::smote_enrich(table, {k_neighbors, seed});
        },
        py::arg("table"), py::arg("k_neighbors") = 5, py::arg("seed") = 0,
        "Balance classes by synthetic minority interpolation.");

    py::class_<ofc::TrainedModel>(m, "Model")
        .def_property_readonly("kind",
                               [](const ofc::TrainedModel& model) {
                                   return std::string(to_string(model.kind()));
                               })
        .def_property_readonly("features", &ofc::TrainedModel::features)
        .def_property_readonly("threshold", &ofc::TrainedModel::threshold)
        .def("score",
             [](const ofc::TrainedModel& model, const std::vector<double>& x) {
                 return model.score(x);
             })
        .def("predict",
             [](const ofc::TrainedModel& model, const std::vector<double>& x) {
                 return model.predict(x);
             })
        .def("to_json", [](const ofc::TrainedModel& model) { return model.to_json().dump(); })
        .def_static("from_json", [](const std::string& text) {
            return ofc::TrainedModel::from_json(parse_json(text, "model"));
        });

    m.def(
        "fit",
        [](const std::string& kind, const ofc::Table& train,
           const std::vector<std::string>& features, const std::string& hyper_json,
           std::uint64_t seed) {
            ofc::ClassifierSpec spec;
            spec.kind = ofc::classifier_kind_from_string(kind);
            spec.hyperparameters = hyper_map_from_json(hyper_json);
            spec.seed = seed;
            return ofc::fit(spec, train, features.empty() ? train.feature_names() : features);
        },
        py::arg("kind"), py::arg("train"), py::arg("features") = std::vector<std::string>{},
        py::arg("hyperparameters") = std::string{}, py::arg("seed") = 0,
        "Train one classifier (naive_bayes, logistic_regression, svm, random_forest, lucck).");

    m.def("auc", [](const std::vector<double>& scores,
                    const std::vector<int>& labels) { return ofc::auc(scores, labels); });
    m.def(
        "metrics",
        [](const std::vector<int>& predictions, const std::vector<int>& labels,
           const std::vector<double>& scores) {
            ofc::MetricSet set = ofc::derive_metrics(ofc::confusion(predictions, labels));
            if (!scores.empty()) {
                try {
                    set.auc = ofc::auc(scores, labels);
                } catch (const ofc::UndefinedMetricError&) {
                    set.auc = std::nullopt;
                }
            }
            return metric_set_to_dict(set);
        },
        py::arg("predictions"), py::arg("labels"), py::arg("scores") = std::vector<double>{},
        "Confusion-derived metrics; AUC included when scores are given.");

    m.def(
        "explain",
        [](const std::function<double(std::vector<double>)>& f, const std::vector<double>& x,
           const std::vector<std::vector<double>>& background, std::size_t coalitions,
           std::uint64_t seed) {
            ofc::ShapConfig cfg;
            cfg.max_background = background.size();
            cfg.coalition_budget = coalitions;
            cfg.seed = seed;
            const ofc::ScoreFunction score = [&f](std::span<const double> row) {
                return f(std::vector<double>(row.begin(), row.end()));
            };
            const ofc::ShapExplanation e = ofc::explain(score, x, background, cfg);
            return py::make_tuple(e.phi0, e.phi);
        },
        py::arg("score"), py::arg("x"), py::arg("background"), py::arg("coalitions") = 2048,
        py::arg("seed") = 0,
        "kernelSHAP attribution of one sample; returns (phi0, [phi per feature]).");

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const ofc::PipelineConfig cfg =
                ofc::PipelineConfig::from_json(parse_json(config_json, "config"));
            const ofc::Table table = ofc::read_csv(cfg.data_path, ofc::read_schema(cfg.schema_path));
            ofc::ExperimentResult result;
            {
                py::gil_scoped_release release;
                result = ofc::run_experiment(table, cfg);
            }
            return result.to_json().dump();
        },
        py::arg("config_json"),
        "Full pipeline from a config JSON text; persists artifacts when the config names an "
        "output_dir. Returns the result document as JSON text.");
}
