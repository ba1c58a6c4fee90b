#include "ofc/error.hpp"
#include "ofc/metrics.hpp"
#include "ofc/mrmr.hpp"
#include "ofc/pipeline.hpp"
#include "ofc/report.hpp"
#include "ofc/rng.hpp"
#include "ofc/shap.hpp"
#include "ofc/synth.hpp"
#include "ofc/tabular.hpp"
#include "ofc/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string default_out_dir() {
    const char* env = std::getenv("OFCKIT_OUT_DIR");
    return env != nullptr && *env != '\0' ? env : "ofckit_out";
}

std::string resolve_data_path(const std::string& data) {
    if (!data.empty()) return data;
    const fs::path fallback = fs::path(default_out_dir()) / "synthetic.csv";
    if (fs::exists(fallback)) return fallback.string();
    throw ofc::ValidationError("no dataset given (--data, config, or a prior synth run)");
}

std::string resolve_schema_path(const std::string& data, const std::string& schema) {
    if (!schema.empty()) return schema;
    const fs::path sidecar = fs::path(data).replace_extension(".schema.json");
    if (fs::exists(sidecar)) return sidecar.string();
    const fs::path shared = fs::path(data).parent_path() / "schema.json";
    if (fs::exists(shared)) return shared.string();
    throw ofc::ValidationError("no schema given and neither " + sidecar.string() + " nor " +
                               shared.string() + " exists (--schema)");
}

nlohmann::json provenance_object(std::uint64_t config_hash, std::uint64_t seed) {
    return {{"config_hash", config_hash}, {"seed", seed}, {"version", ofc::kVersion}};
}

// write_csv prefixes each comment line with "# " itself.
std::vector<std::string> csv_comments(std::uint64_t config_hash, std::uint64_t seed) {
    std::vector<std::string> lines;
    for (const std::string& line : ofc::provenance_header(config_hash, seed)) {
        lines.push_back(line.substr(2));
    }
    return lines;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ofc::Error("cannot read " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ofc::ParseError(path + ": " + e.what());
    }
    return doc;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ofc::Error("cannot write " + path.string());
    out << content;
}

ofc::PipelineConfig load_config(const std::string& config_path, const std::string& data,
                                const std::string& schema, const std::string& out_dir,
                                int threads) {
    ofc::PipelineConfig cfg;
    if (!config_path.empty()) {
        cfg = ofc::PipelineConfig::from_json(load_json(config_path));
    }
    if (!data.empty()) cfg.data_path = data;
    if (!schema.empty()) cfg.schema_path = schema;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (cfg.output_dir.empty()) cfg.output_dir = default_out_dir();
    cfg.data_path = resolve_data_path(cfg.data_path);
    cfg.schema_path = resolve_schema_path(cfg.data_path, cfg.schema_path);
    cfg.partition.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

void write_schema_file(const std::vector<ofc::ColumnSpec>& schema, const fs::path& path,
                       const nlohmann::json& provenance) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& col : schema) {
        nlohmann::json item{{"name", col.name}, {"kind", std::string(ofc::to_string(col.kind))}};
        if (!col.unit.empty()) item["unit"] = col.unit;
        cols.push_back(std::move(item));
    }
    const nlohmann::json doc{{"columns", cols}, {"provenance", provenance}};
    std::ofstream out(path);
    if (!out) throw ofc::Error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

ofc::Table load_table(const ofc::PipelineConfig& cfg) {
    const auto schema = ofc::read_schema(cfg.schema_path);
    return ofc::read_csv(cfg.data_path, schema);
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
    ofc::SynthSpec spec;
    if (!spec_path.empty()) spec = ofc::SynthSpec::from_json(load_json(spec_path));
    const ofc::SynthResult result = ofc::generate(spec);
    const std::uint64_t hash = ofc::rng::fnv1a(spec.to_json().dump());
    const nlohmann::json provenance = provenance_object(hash, spec.seed);

    const fs::path dir(out_dir.empty() ? default_out_dir() : out_dir);
    fs::create_directories(dir);
    ofc::write_csv(result.table, dir / "synthetic.csv", csv_comments(hash, spec.seed));
    write_schema_file(result.table.schema(), dir / "schema.json", provenance);
    nlohmann::json manifest = result.manifest();
    manifest["spec"] = spec.to_json();
    manifest["provenance"] = provenance;
    write_file(dir / "truth.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (dir / "synthetic.csv").string() << " (" << result.table.n_rows()
              << " rows), schema.json, truth.json\n";
    return kExitOk;
}

int run_preprocess(const std::string& data, const std::string& schema_path,
                   const std::string& out_path, const std::vector<std::string>& drop) {
    const auto schema = ofc::read_schema(resolve_schema_path(data, schema_path));
    ofc::Table table = ofc::read_csv(data, schema);
    const std::size_t before = table.n_rows();
    if (!drop.empty()) table = ofc::drop_columns(table, drop);
    table = ofc::drop_incomplete(table);
    table = ofc::one_hot_encode(table);

    const std::uint64_t hash = ofc::rng::fnv1a(nlohmann::json{{"data", data}, {"drop", drop}}.dump());
    auto comments = csv_comments(hash, 0);
    comments.push_back("preprocessed: censored bounds resolved, " +
                       std::to_string(before - table.n_rows()) + " incomplete rows dropped");
    if (fs::path(out_path).has_parent_path()) {
        fs::create_directories(fs::path(out_path).parent_path());
    }
    ofc::write_csv(table, out_path, comments);
    const fs::path schema_out = fs::path(out_path).replace_extension(".schema.json");
    write_schema_file(table.schema(), schema_out, provenance_object(hash, 0));
    std::cout << "wrote " << out_path << " (" << table.n_rows() << " of " << before
              << " rows kept) and " << schema_out.string() << "\n";
    return kExitOk;
}

int run_rank(const std::string& config_path, const std::string& data, const std::string& schema,
             const std::string& out_dir, int threads) {
    const ofc::PipelineConfig cfg = load_config(config_path, data, schema, out_dir, threads);
    const ofc::Table table = load_table(cfg);

    // Ranking uses the same per-shuffle feature-selection subsets as a full
    // run, without training any models.
    const std::vector<std::string> features = table.feature_names();
    ofc::ExperimentResult result;
    result.shuffles.resize(static_cast<std::size_t>(cfg.partition.shuffles));
    ofc::parallel_for(result.shuffles.size(), cfg.threads, [&](std::size_t s) {
        ofc::ShuffleRecord record;
        record.shuffle = static_cast<int>(s);
        const ofc::Partition partition =
            ofc::make_partition(table, cfg.partition, static_cast<int>(s));
        const ofc::Table tagged = ofc::with_set_tags(table, partition);
        const ofc::Table fs_view = tagged.subset(partition.feature_selection_rows);
        record.ranking = ofc::mrmr_rank(fs_view, features, cfg.mi_bins);
        result.shuffles[s] = std::move(record);
    });

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    ofc::write_text_file((dir / "rankings.tsv").string(), ofc::provenance_header(cfg),
                         ofc::format_ranking_table(result));
    std::cout << "wrote " << (dir / "rankings.tsv").string() << "\n";
    return kExitOk;
}

int run_train(const std::string& config_path, const std::string& data, const std::string& schema,
              const std::string& out_dir, int threads) {
    const ofc::PipelineConfig cfg = load_config(config_path, data, schema, out_dir, threads);
    const ofc::Table table = load_table(cfg);
    const ofc::ExperimentResult result = ofc::run_experiment(table, cfg);

    const fs::path dir(cfg.output_dir);
    const auto header = ofc::provenance_header(cfg);
    ofc::write_text_file((dir / "metrics.tsv").string(), header,
                         ofc::format_metric_table(result));
    ofc::write_text_file((dir / "rankings.tsv").string(), header,
                         ofc::format_ranking_table(result));
    std::cout << "wrote " << (dir / "metrics.tsv").string() << ", rankings.tsv, result.json, "
              << "manifests/ and models/ for " << result.shuffles.size() << " shuffles\n";
    return kExitOk;
}

int run_evaluate(const std::string& models_dir, const std::string& data,
                 const std::string& schema_path, const std::string& out_path) {
    const auto schema = ofc::read_schema(resolve_schema_path(data, schema_path));
    const ofc::Table table = ofc::read_csv(data, schema);
    const std::vector<int> labels = table.labels01();

    std::ostringstream body;
    body << "artifact\tkind";
    for (const char* name : ofc::kMetricNames) body << "\t" << name;
    body << "\n";

    std::vector<fs::path> artifacts;
    for (const auto& entry : fs::recursive_directory_iterator(models_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            artifacts.push_back(entry.path());
        }
    }
    std::sort(artifacts.begin(), artifacts.end());
    if (artifacts.empty()) throw ofc::ValidationError("no model artifacts under " + models_dir);

    for (const fs::path& path : artifacts) {
        const nlohmann::json doc = load_json(path.string());
        const std::string format = doc.value("format", "");
        std::vector<double> scores;
        std::vector<int> predictions;
        std::string kind;
        if (format == ofc::kEnsembleFormat) {
            const ofc::EnsembleModel ensemble = ofc::EnsembleModel::from_json(doc);
            kind = std::string(to_string(ensemble.members.front().model.kind())) + " ensemble";
            const auto x = table.matrix(ensemble.members.front().model.features());
            for (const auto& raw : x) {
                const auto [label, score] = ofc::ensemble_predict(ensemble, raw);
                predictions.push_back(label);
                scores.push_back(score);
            }
        } else if (format == ofc::kPreparedFormat) {
            const ofc::PreparedModel model = ofc::PreparedModel::from_json(doc);
            kind = std::string(to_string(model.model.kind())) + " cv";
            const auto x = table.matrix(model.model.features());
            for (const auto& raw : x) {
                predictions.push_back(model.predict(raw));
                scores.push_back(model.score(raw));
            }
        } else {
            continue; // not a model artifact
        }
        ofc::MetricSet set = ofc::derive_metrics(ofc::confusion(predictions, labels));
        try {
            set.auc = ofc::auc(scores, labels);
        } catch (const ofc::UndefinedMetricError&) {
            set.auc = std::nullopt;
        }
        body << fs::relative(path, models_dir).string() << "\t" << kind;
        for (int i = 0; i < 6; ++i) {
            const auto& v = ofc::metric_field(set, i);
            if (v) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", *v);
                body << "\t" << buf;
            } else {
                body << "\t-";
            }
        }
        body << "\n";
    }

    const std::uint64_t hash =
        ofc::rng::fnv1a(nlohmann::json{{"data", data}, {"models", models_dir}}.dump());
    ofc::write_text_file(out_path, ofc::provenance_header(hash, 0), body.str());
    std::cout << "wrote " << out_path << " (" << artifacts.size() << " artifacts)\n";
    return kExitOk;
}

int run_explain(const std::string& model_path, const std::string& data,
                const std::string& schema_path, const std::string& config_path,
                const std::string& out_dir, int threads) {
    const auto schema = ofc::read_schema(resolve_schema_path(data, schema_path));
    const ofc::Table table = ofc::read_csv(data, schema);
    const nlohmann::json doc = load_json(model_path);

    ofc::ShapConfig shap_cfg;
    if (!config_path.empty()) {
        const nlohmann::json cfg_doc = load_json(config_path);
        if (cfg_doc.contains("shap")) {
            const auto& s = cfg_doc.at("shap");
            shap_cfg.max_background = s.value("background", shap_cfg.max_background);
            shap_cfg.coalition_budget = s.value("coalitions", shap_cfg.coalition_budget);
        }
        shap_cfg.seed = cfg_doc.value("seed", shap_cfg.seed);
        if (threads <= 0) threads = cfg_doc.value("threads", 1);
    }
    if (threads <= 0) threads = 1;

    ofc::ScoreFunction score;
    std::vector<std::string> features;
    const std::string format = doc.value("format", "");
    ofc::PreparedModel prepared;
    ofc::EnsembleModel ensemble;
    if (format == ofc::kEnsembleFormat) {
        ensemble = ofc::EnsembleModel::from_json(doc);
        features = ensemble.members.front().model.features();
        score = [&ensemble](std::span<const double> raw) {
            return ofc::ensemble_predict(ensemble, raw).second;
        };
    } else if (format == ofc::kPreparedFormat) {
        prepared = ofc::PreparedModel::from_json(doc);
        features = prepared.model.features();
        score = [&prepared](std::span<const double> raw) { return prepared.score(raw); };
    } else {
        throw ofc::ParseError(model_path + " is not a model artifact");
    }

    const auto x = table.matrix(features);
    const auto labels = table.labels01();
    const auto background = ofc::background_sample(x, shap_cfg.max_background, shap_cfg.seed);

    std::vector<ofc::ShapExplanation> explanations(x.size());
    ofc::parallel_for(x.size(), threads, [&](std::size_t i) {
        explanations[i] = ofc::explain(score, x[i], background, shap_cfg);
    });
    const ofc::ShapAggregate aggregate = ofc::aggregate_shap(explanations, labels, features);

    const std::uint64_t hash = ofc::rng::fnv1a(nlohmann::json{{"background", shap_cfg.max_background},
                                                              {"coalitions", shap_cfg.coalition_budget},
                                                              {"data", data},
                                                              {"model", model_path}}
                                                   .dump());
    const auto header = ofc::provenance_header(hash, shap_cfg.seed);
    std::string svg_comment = "<!--";
    for (const std::string& line : header) svg_comment += " " + line.substr(2);
    svg_comment += " -->\n";

    const fs::path dir(out_dir.empty() ? default_out_dir() : out_dir);
    fs::create_directories(dir);
    ofc::write_text_file((dir / "shap.tsv").string(), header, ofc::format_shap_table(aggregate));
    write_file(dir / "shap.svg",
               svg_comment + ofc::render_shap_svg(aggregate, fs::path(model_path).stem().string()));
    std::cout << "wrote " << (dir / "shap.tsv").string() << " and shap.svg ("
              << aggregate.n_samples << " samples, " << aggregate.n_pass << " pass / "
              << aggregate.n_fail << " fail)\n";
    return kExitOk;
}

int run_report(const std::string& run_dir, const std::string& out_path) {
    const fs::path result_path = fs::path(run_dir) / "result.json";
    if (!fs::exists(result_path)) {
        throw ofc::ValidationError("no result.json under " + run_dir +
                                   " (expected a train output directory)");
    }
    const nlohmann::json doc = load_json(result_path.string());

    std::ostringstream out;
    out << "run report\n==========\n";
    if (doc.contains("provenance")) {
        const auto& p = doc.at("provenance");
        out << "seed: " << p.value("seed", std::uint64_t{0}) << "\n";
        out << "version: " << p.value("version", "?") << "\n";
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(p.value("config_hash", std::uint64_t{0})));
        out << "config_hash: " << hash << "\n";
    }
    out << "\n";

    // Rebuild the human-readable summary from the persisted result.
    ofc::ExperimentResult result;
    for (const auto& shuffle_doc : doc.at("shuffles")) {
        ofc::ShuffleRecord record;
        record.shuffle = shuffle_doc.value("shuffle", 0);
        record.failed = shuffle_doc.value("failed", false);
        record.error = shuffle_doc.value("error", "");
        record.k_selected = shuffle_doc.value("k_selected", 0);
        for (const auto& entry : shuffle_doc.at("ranking")) {
            record.ranking.ordered.emplace_back(entry.at("feature").get<std::string>(),
                                                entry.at("score").get<double>());
        }
        result.shuffles.push_back(std::move(record));
    }
    auto read_aggregates = [&doc](const char* key) {
        std::map<std::string, ofc::MetricAggregate> out_map;
        for (const auto& [kind, agg_doc] : doc.at(key).items()) {
            ofc::MetricAggregate agg;
            for (int i = 0; i < 6; ++i) {
                const auto& m = agg_doc.at("metrics").at(ofc::kMetricNames[i]);
                agg.entries[i].mean = m.value("mean", 0.0);
                agg.entries[i].stddev = m.value("stddev", 0.0);
                agg.entries[i].used = m.value("used", 0);
                agg.entries[i].skipped = m.value("skipped", 0);
            }
            out_map[kind] = std::move(agg);
        }
        return out_map;
    };
    result.cv_aggregate = read_aggregates("cv_aggregate");
    result.ensemble_aggregate = read_aggregates("ensemble_aggregate");
    out << ofc::format_run_summary(result);

    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        write_file(out_path, out.str());
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble-learning toolkit for food-challenge outcome prediction"};
    app.set_version_flag("--version", ofc::kVersion);
    app.require_subcommand(1);

    std::string spec_path, config_path, data_path, schema_path, out_arg, models_dir, model_path,
        run_dir;
    std::vector<std::string> drop_columns;
    int threads = 0;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("--spec", spec_path, "Generator spec JSON (defaults used when omitted)");
    synth->add_option("--out", out_arg, "Output directory");

    auto* preprocess = app.add_subcommand("preprocess", "Normalize censored values, drop "
                                                        "incomplete rows, one-hot encode");
    preprocess->add_option("--data", data_path, "Input CSV")->required();
    preprocess->add_option("--schema", schema_path, "Schema JSON (default: sidecar of --data)");
    preprocess->add_option("--out", out_arg, "Output CSV path")->required();
    preprocess->add_option("--drop", drop_columns, "Columns to remove before the other steps");

    auto* rank = app.add_subcommand("rank", "Per-shuffle mRMR feature rankings");
    rank->add_option("--data", data_path, "Input CSV");
    rank->add_option("--schema", schema_path, "Schema JSON");
    rank->add_option("--config", config_path, "Pipeline config JSON");
    rank->add_option("--out", out_arg, "Output directory");
    rank->add_option("--threads", threads, "Worker thread cap");

    auto* train = app.add_subcommand("train", "Full experiment: search, cv + ensemble models, "
                                              "test metrics");
    train->add_option("--data", data_path, "Input CSV");
    train->add_option("--schema", schema_path, "Schema JSON");
    train->add_option("--config", config_path, "Pipeline config JSON");
    train->add_option("--out", out_arg, "Output directory");
    train->add_option("--threads", threads, "Worker thread cap");

    auto* evaluate = app.add_subcommand("evaluate", "Score persisted model artifacts on a "
                                                    "dataset");
    evaluate->add_option("--models", models_dir, "Directory of model artifacts")->required();
    evaluate->add_option("--data", data_path, "Evaluation CSV")->required();
    evaluate->add_option("--schema", schema_path, "Schema JSON (default: sidecar of --data)");
    evaluate->add_option("--out", out_arg, "Output TSV path")->required();

    auto* explain = app.add_subcommand("explain", "kernelSHAP attributions for one artifact");
    explain->add_option("--model", model_path, "Model artifact JSON")->required();
    explain->add_option("--data", data_path, "Samples to explain (CSV)")->required();
    explain->add_option("--schema", schema_path, "Schema JSON (default: sidecar of --data)");
    explain->add_option("--config", config_path, "Config JSON (shap section)");
    explain->add_option("--out", out_arg, "Output directory");
    explain->add_option("--threads", threads, "Worker thread cap");

    auto* report = app.add_subcommand("report", "Consolidated summary of a train run");
    report->add_option("--run", run_dir, "Train output directory (default: the default output "
                                         "directory)");
    report->add_option("--out", out_arg, "Summary file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) return run_synth(spec_path, out_arg);
        if (preprocess->parsed()) {
            return run_preprocess(data_path, schema_path, out_arg, drop_columns);
        }
        if (rank->parsed()) {
            return run_rank(config_path, data_path, schema_path, out_arg, threads);
        }
        if (train->parsed()) {
            return run_train(config_path, data_path, schema_path, out_arg, threads);
        }
        if (evaluate->parsed()) {
            return run_evaluate(models_dir, data_path, schema_path, out_arg);
        }
        if (explain->parsed()) {
            return run_explain(model_path, data_path, schema_path, config_path, out_arg, threads);
        }
        if (report->parsed()) {
            return run_report(run_dir.empty() ? default_out_dir() : run_dir, out_arg);
        }
    } catch (const ofc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ofc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
