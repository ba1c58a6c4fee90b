// End-to-end checks of the ofckit binary: exit codes, artifact layout,
// provenance stamping, and rerun determinism. Runs the tool as a subprocess;
// the binary path arrives via the OFCKIT_BIN environment variable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int g_checks = 0;
int g_failures = 0;
std::string g_bin;
fs::path g_work;

void check(bool ok, const std::string& what) {
    ++g_checks;
    if (ok) {
        std::cout << "ok: " << what << "\n";
    } else {
        ++g_failures;
        std::cout << "FAIL: " << what << "\n";
    }
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

bool starts_with(const std::string& hay, const std::string& prefix) {
    return hay.rfind(prefix, 0) == 0;
}

// Runs the tool with `args`, captures combined output into `log_name`, and
// returns the exit code (-1 when the process did not exit normally).
int run_cmd(const std::string& args, const std::string& log_name) {
    const fs::path log = g_work / "logs" / (log_name + ".log");
    fs::create_directories(log.parent_path());
    const std::string cmd = "\"" + g_bin + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

std::string log_text(const std::string& log_name) {
    return slurp(g_work / "logs" / (log_name + ".log"));
}

// Byte-level comparison of two directory trees (relative layout + contents).
bool trees_identical(const fs::path& a, const fs::path& b, std::string& detail) {
    std::vector<fs::path> rel_a, rel_b;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (entry.is_regular_file()) rel_a.push_back(fs::relative(entry.path(), a));
    }
    for (const auto& entry : fs::recursive_directory_iterator(b)) {
        if (entry.is_regular_file()) rel_b.push_back(fs::relative(entry.path(), b));
    }
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        detail = "file lists differ (" + std::to_string(rel_a.size()) + " vs " +
                 std::to_string(rel_b.size()) + " files)";
        return false;
    }
    for (const fs::path& rel : rel_a) {
        if (slurp(a / rel) != slurp(b / rel)) {
            detail = "content differs: " + rel.string();
            return false;
        }
    }
    return true;
}

const char* kSmallSpec = R"({
  "patients": 60,
  "informative_features": 3,
  "noise_features": 2,
  "separation": 4.0,
  "seed": 11
})";

const char* kSmallConfig = R"({
  "seed": 3,
  "partition": {"shuffles": 2, "folds": 3},
  "models": ["naive_bayes", "logistic_regression"],
  "feature_count": 3,
  "mi_bins": 4,
  "search": {"trials": 2}
})";

std::string all_pass_csv() {
    std::ostringstream out;
    out << "patient_id,f0,f1,f2,outcome\n";
    for (int i = 0; i < 30; ++i) {
        out << "Q" << i << "," << 0.1 * i << "," << 0.2 * i + 1.0 << "," << (i % 7) << ",pass\n";
    }
    return out.str();
}

const char* kAllPassSchema = R"({
  "columns": [
    {"name": "patient_id", "kind": "identifier"},
    {"name": "f0", "kind": "numeric"},
    {"name": "f1", "kind": "numeric"},
    {"name": "f2", "kind": "numeric"},
    {"name": "outcome", "kind": "outcome"}
  ]
})";

} // namespace

int main() {
    const char* bin = std::getenv("OFCKIT_BIN");
    if (bin == nullptr || *bin == '\0') {
        std::cout << "FAIL: OFCKIT_BIN is not set\n";
        return 1;
    }
    g_bin = bin;
    g_work = fs::temp_directory_path() / "ofckit_cli_tests";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    // Any run that falls back to the default output directory stays inside
    // the workspace.
    const fs::path default_run = g_work / "default_run";
    setenv("OFCKIT_OUT_DIR", default_run.string().c_str(), 1);

    // --- argument handling ---------------------------------------------
    check(run_cmd("--version", "version") == 0, "--version exits 0");
    check(contains(log_text("version"), "0.1"), "--version prints the version");
    check(run_cmd("", "no_subcommand") == 1, "missing subcommand exits 1");
    check(run_cmd("synth --bogus", "unknown_flag") == 1, "unknown flag exits 1");

    // --- config validation ---------------------------------------------
    spit(g_work / "bad.json", "{ not json\n");
    check(run_cmd("train --config \"" + (g_work / "bad.json").string() + "\"", "bad_json") == 2,
          "malformed config JSON exits 2");
    spit(g_work / "folds1.json", R"({"partition": {"folds": 1}})");
    check(run_cmd("train --config \"" + (g_work / "folds1.json").string() + "\"", "folds1") == 2,
          "folds=1 config exits 2");
    check(run_cmd("train --data \"" + (g_work / "nope.csv").string() + "\"", "missing_data") == 2,
          "missing dataset exits 2");

    // --- small synth + train -------------------------------------------
    spit(g_work / "small_spec.json", kSmallSpec);
    spit(g_work / "small_config.json", kSmallConfig);
    const fs::path data_dir = g_work / "data";
    const std::string data_csv = (data_dir / "synthetic.csv").string();
    check(run_cmd("synth --spec \"" + (g_work / "small_spec.json").string() + "\" --out \"" +
                      data_dir.string() + "\"",
                  "synth_small") == 0,
          "synth with a spec exits 0");
    check(fs::exists(data_dir / "synthetic.csv") && fs::exists(data_dir / "schema.json") &&
              fs::exists(data_dir / "truth.json"),
          "synth writes synthetic.csv, schema.json, truth.json");
    check(starts_with(slurp(data_dir / "synthetic.csv"), "# config_hash="),
          "synth CSV carries a provenance header");
    check(contains(slurp(data_dir / "truth.json"), "\"informative\""),
          "truth manifest names the informative columns");

    const std::string small_cfg = (g_work / "small_config.json").string();
    const fs::path run_a = g_work / "runA";
    check(run_cmd("train --config \"" + small_cfg + "\" --data \"" + data_csv + "\" --out \"" +
                      run_a.string() + "\"",
                  "train_a") == 0,
          "train (small config) exits 0");
    check(fs::exists(run_a / "metrics.tsv") && fs::exists(run_a / "rankings.tsv") &&
              fs::exists(run_a / "result.json"),
          "train writes metrics.tsv, rankings.tsv, result.json");
    check(fs::exists(run_a / "manifests" / "shuffle_00.tsv") &&
              fs::exists(run_a / "manifests" / "shuffle_01.tsv"),
          "train writes one partition manifest per shuffle");
    check(fs::exists(run_a / "models" / "shuffle_00" / "naive_bayes_cv.json") &&
              fs::exists(run_a / "models" / "shuffle_00" / "naive_bayes_ensemble.json") &&
              fs::exists(run_a / "models" / "shuffle_00" / "logistic_regression_cv.json") &&
              fs::exists(run_a / "models" / "shuffle_00" / "logistic_regression_ensemble.json"),
          "train persists cv and ensemble artifacts per kind");
    const std::string metrics_a = slurp(run_a / "metrics.tsv");
    check(starts_with(metrics_a, "# config_hash="), "metrics.tsv carries a provenance header");
    check(contains(metrics_a, "naive_bayes") && contains(metrics_a, "logistic_regression"),
          "metrics.tsv lists the configured model kinds");
    check(contains(slurp(run_a / "result.json"), "\"cv_aggregate\""),
          "result.json holds the aggregate grid");

    // --- rerun determinism ---------------------------------------------
    const fs::path run_b = g_work / "runB";
    check(run_cmd("train --config \"" + small_cfg + "\" --data \"" + data_csv + "\" --out \"" +
                      run_b.string() + "\"",
                  "train_b") == 0,
          "train rerun exits 0");
    std::string detail;
    check(trees_identical(run_a, run_b, detail),
          "rerun into a different --out is byte-identical" +
              (detail.empty() ? "" : " (" + detail + ")"));

    // --- rank ----------------------------------------------------------
    const fs::path rank_out = g_work / "rank_out";
    check(run_cmd("rank --config \"" + small_cfg + "\" --data \"" + data_csv + "\" --out \"" +
                      rank_out.string() + "\"",
                  "rank") == 0,
          "rank exits 0");
    const std::string rankings = slurp(rank_out / "rankings.tsv");
    check(starts_with(rankings, "# config_hash=") && contains(rankings, "info_01"),
          "rankings.tsv has provenance and feature rows");

    // --- preprocess ----------------------------------------------------
    const fs::path pre_csv = g_work / "pre" / "pre.csv";
    check(run_cmd("preprocess --data \"" + data_csv + "\" --out \"" + pre_csv.string() + "\"",
                  "preprocess") == 0,
          "preprocess exits 0");
    check(fs::exists(pre_csv) && fs::exists(g_work / "pre" / "pre.schema.json"),
          "preprocess writes the CSV and a schema sidecar");

    // --- evaluate ------------------------------------------------------
    const fs::path eval_tsv = g_work / "eval.tsv";
    check(run_cmd("evaluate --models \"" + (run_a / "models").string() + "\" --data \"" +
                      data_csv + "\" --out \"" + eval_tsv.string() + "\"",
                  "evaluate") == 0,
          "evaluate exits 0");
    const std::string eval_text = slurp(eval_tsv);
    check(starts_with(eval_text, "# config_hash=") && contains(eval_text, "naive_bayes") &&
              contains(eval_text, "auc"),
          "evaluate output lists artifacts with metric columns");

    // --- explain -------------------------------------------------------
    const fs::path shap_out = g_work / "shap_out";
    const std::string artifact =
        (run_a / "models" / "shuffle_00" / "logistic_regression_cv.json").string();
    check(run_cmd("explain --model \"" + artifact + "\" --data \"" + data_csv + "\" --out \"" +
                      shap_out.string() + "\"",
                  "explain") == 0,
          "explain exits 0");
    check(fs::exists(shap_out / "shap.tsv") && fs::exists(shap_out / "shap.svg"),
          "explain writes shap.tsv and shap.svg");
    check(starts_with(slurp(shap_out / "shap.tsv"), "# config_hash="),
          "shap.tsv carries a provenance header");
    check(contains(slurp(shap_out / "shap.svg"), "<svg"), "shap.svg contains SVG markup");

    // --- report --------------------------------------------------------
    check(run_cmd("report --run \"" + run_a.string() + "\"", "report_a") == 0, "report exits 0");
    check(contains(log_text("report_a"), "run report"), "report prints the summary");
    fs::create_directories(g_work / "empty_dir");
    check(run_cmd("report --run \"" + (g_work / "empty_dir").string() + "\"", "report_empty") == 2,
          "report on a directory without result.json exits 2");

    // --- runtime failure -----------------------------------------------
    // A single-class dataset makes every shuffle fail, which the tool
    // reports as a runtime error.
    spit(g_work / "all_pass.csv", all_pass_csv());
    spit(g_work / "all_pass.schema.json", kAllPassSchema);
    check(run_cmd("train --config \"" + small_cfg + "\" --data \"" +
                      (g_work / "all_pass.csv").string() + "\" --out \"" +
                      (g_work / "fail_run").string() + "\"",
                  "all_pass") == 3,
          "single-class dataset exits 3");

    // --- flag-free defaults --------------------------------------------
    // The documented smoke path: synth, train, report with no flags at all.
    check(run_cmd("synth", "synth_default") == 0, "flag-free synth exits 0");
    check(fs::exists(default_run / "synthetic.csv") && fs::exists(default_run / "schema.json"),
          "flag-free synth fills the default output directory");
    check(run_cmd("train", "train_default") == 0, "flag-free train exits 0");
    const std::string default_metrics = slurp(default_run / "metrics.tsv");
    for (const char* kind : {"naive_bayes", "logistic_regression", "svm", "random_forest",
                             "lucck"}) {
        check(contains(default_metrics, kind),
              std::string("default metrics.tsv covers ") + kind);
    }
    check(fs::exists(default_run / "manifests" / "shuffle_09.tsv"),
          "default train produces ten shuffles");
    check(run_cmd("report", "report_default") == 0, "flag-free report exits 0");
    check(contains(log_text("report_default"), "run report"),
          "flag-free report prints the summary");

    std::cout << "\ncli_tests: " << g_checks << " checks, " << g_failures << " failures\n";
    return g_failures == 0 ? 0 : 1;
}
