#include "ofc/report.hpp"

#include "ofc/error.hpp"
#include "ofc/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ofc {

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string mean_std_cell(const MetricAggregate::Entry& entry) {
    if (entry.used == 0) return "-";
    std::string cell = fixed(entry.mean) + " (" + fixed(entry.stddev) + ")";
    if (entry.skipped > 0) {
        cell += " [" + std::to_string(entry.skipped) + " skipped]";
    }
    return cell;
}

void append_metric_rows(std::ostringstream& out, const std::string& variant,
                        const std::map<std::string, MetricAggregate>& aggregates) {
    for (const auto& [kind, agg] : aggregates) {
        out << kind << "\t" << variant;
        for (int i = 0; i < 6; ++i) out << "\t" << mean_std_cell(agg[i]);
        out << "\n";
    }
}

} // namespace

std::vector<std::string> provenance_header(std::uint64_t config_hash, std::uint64_t seed) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
    return {std::string("# config_hash=") + hash, "# seed=" + std::to_string(seed),
            std::string("# version=") + kVersion};
}

std::vector<std::string> provenance_header(const PipelineConfig& cfg) {
    return provenance_header(cfg.config_hash(), cfg.seed);
}

std::string format_metric_table(const ExperimentResult& result) {
    std::ostringstream out;
    out << "model\tvariant";
    for (const char* name : kMetricNames) out << "\t" << name;
    out << "\n";
    append_metric_rows(out, "cv", result.cv_aggregate);
    append_metric_rows(out, "ensemble", result.ensemble_aggregate);
    return out.str();
}

std::string format_ranking_table(const ExperimentResult& result) {
    // Mean and sample std of each feature's 1-based rank across the
    // successful shuffles.
    std::map<std::string, std::vector<double>> ranks;
    for (const ShuffleRecord& record : result.shuffles) {
        if (record.failed) continue;
        for (std::size_t i = 0; i < record.ranking.ordered.size(); ++i) {
            ranks[record.ranking.ordered[i].first].push_back(static_cast<double>(i + 1));
        }
    }
    struct Row {
        std::string feature;
        double mean = 0.0;
        double stddev = 0.0;
        std::size_t n = 0;
    };
    std::vector<Row> rows;
    for (const auto& [feature, values] : ranks) {
        Row row;
        row.feature = feature;
        row.n = values.size();
        for (double v : values) row.mean += v;
        row.mean /= static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.mean < b.mean; });

    std::ostringstream out;
    out << "rank\tfeature\tmean_rank\tstd_rank\tshuffles\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i + 1 << "\t" << rows[i].feature << "\t" << fixed(rows[i].mean, 2) << "\t"
            << fixed(rows[i].stddev, 2) << "\t" << rows[i].n << "\n";
    }
    return out.str();
}

std::string format_shap_table(const ShapAggregate& aggregate) {
    std::ostringstream out;
    out << "feature\tmean_abs_shap\tmean_abs_shap_pass\tmean_abs_shap_fail\n";
    for (const ShapAggregate::Row& row : aggregate.rows) {
        out << row.feature << "\t" << fixed(row.mean_abs_overall, 6) << "\t"
            << (row.mean_abs_pass ? fixed(*row.mean_abs_pass, 6) : "-") << "\t"
            << (row.mean_abs_fail ? fixed(*row.mean_abs_fail, 6) : "-") << "\n";
    }
    return out.str();
}

std::string render_shap_svg(const ShapAggregate& aggregate, const std::string& title) {
    const int label_width = 180;
    const int bar_area = 380;
    const int bar_height = 9;
    const int group_gap = 8;
    const int group_height = 2 * bar_height + group_gap;
    const int top = 50;
    const int height = top + static_cast<int>(aggregate.rows.size()) * group_height + 30;
    const int width = label_width + bar_area + 80;

    double max_value = 0.0;
    for (const ShapAggregate::Row& row : aggregate.rows) {
        max_value = std::max(max_value, row.mean_abs_pass.value_or(0.0));
        max_value = std::max(max_value, row.mean_abs_fail.value_or(0.0));
        max_value = std::max(max_value, row.mean_abs_overall);
    }
    if (max_value <= 0.0) max_value = 1.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    out << "<rect x=\"" << label_width << "\" y=\"34\" width=\"10\" height=\"10\" "
        << "fill=\"#4c72b0\"/><text x=\"" << label_width + 14
        << "\" y=\"43\">pass (mean |phi|)</text>\n";
    out << "<rect x=\"" << label_width + 140 << "\" y=\"34\" width=\"10\" height=\"10\" "
        << "fill=\"#dd8452\"/><text x=\"" << label_width + 154
        << "\" y=\"43\">fail (mean |phi|)</text>\n";

    int y = top;
    for (const ShapAggregate::Row& row : aggregate.rows) {
        out << "<text x=\"" << label_width - 6 << "\" y=\"" << y + bar_height + 3
            << "\" text-anchor=\"end\">" << row.feature << "</text>\n";
        const double pass_value = row.mean_abs_pass.value_or(0.0);
        const double fail_value = row.mean_abs_fail.value_or(0.0);
        const int pass_px = static_cast<int>(std::lround(pass_value / max_value * bar_area));
        const int fail_px = static_cast<int>(std::lround(fail_value / max_value * bar_area));
        out << "<rect x=\"" << label_width << "\" y=\"" << y << "\" width=\"" << pass_px
            << "\" height=\"" << bar_height << "\" fill=\"#4c72b0\"/>\n";
        out << "<text x=\"" << label_width + pass_px + 4 << "\" y=\"" << y + bar_height - 1
            << "\">" << (row.mean_abs_pass ? fixed(pass_value, 3) : "n/a") << "</text>\n";
        out << "<rect x=\"" << label_width << "\" y=\"" << y + bar_height << "\" width=\""
            << fail_px << "\" height=\"" << bar_height << "\" fill=\"#dd8452\"/>\n";
        out << "<text x=\"" << label_width + fail_px + 4 << "\" y=\"" << y + 2 * bar_height - 1
            << "\">" << (row.mean_abs_fail ? fixed(fail_value, 3) : "n/a") << "</text>\n";
        y += group_height;
    }
    out << "</svg>\n";
    return out.str();
}

std::string format_run_summary(const ExperimentResult& result) {
    std::ostringstream out;
    std::size_t failed = 0;
    for (const ShuffleRecord& record : result.shuffles) {
        if (record.failed) ++failed;
    }
    out << "shuffles: " << result.shuffles.size() << " (" << failed << " failed)\n\n";
    out << "metrics (mean (std) across shuffles)\n";
    out << format_metric_table(result) << "\n";
    out << "feature ranking (mean rank across shuffles)\n";
    out << format_ranking_table(result);
    if (failed > 0) {
        out << "\nfailures\n";
        for (const ShuffleRecord& record : result.shuffles) {
            if (record.failed) {
                out << "shuffle " << record.shuffle << ": " << record.error << "\n";
            }
        }
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::vector<std::string>& header,
                     const std::string& body) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const std::string& line : header) out << line << "\n";
    out << body;
}

} // namespace ofc
