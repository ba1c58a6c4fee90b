#pragma once

#include "ofc/pipeline.hpp"
#include "ofc/shap.hpp"

#include <string>
#include <vector>

namespace ofc {

/// "# key=value" provenance lines stamped into every output file.
std::vector<std::string> provenance_header(std::uint64_t config_hash, std::uint64_t seed);
std::vector<std::string> provenance_header(const PipelineConfig& cfg);

/// Tab-separated metric table: one row per (kind, cv|ensemble), one
/// "mean (std)" column per metric plus a skip count where applicable.
std::string format_metric_table(const ExperimentResult& result);

/// Tab-separated ranking table: rank, feature, mean rank across
/// shuffles, std.
std::string format_ranking_table(const ExperimentResult& result);

/// Tab-separated SHAP table: feature, mean |phi| overall, pass class,
/// fail class.
std::string format_shap_table(const ShapAggregate& aggregate);

/// Horizontal bar chart of per-class mean |phi| as a standalone SVG.
std::string render_shap_svg(const ShapAggregate& aggregate, const std::string& title);

/// Human-readable run summary combining metrics, rankings, and failures.
std::string format_run_summary(const ExperimentResult& result);

/// Writes text to path, prefixing the provenance lines.
void write_text_file(const std::string& path, const std::vector<std::string>& header,
                     const std::string& body);

} // namespace ofc
