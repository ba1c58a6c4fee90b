#pragma once

#include "ofc/tabular.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ofc {

/// Generator description for synthetic challenge-like datasets. Informative
/// features are class-conditional Gaussians with means +-separation/2
/// (unit variance); noise features ignore the class; comorbidities are
/// Bernoulli flags with class-dependent rates.
struct SynthSpec {
    std::size_t patients = 500;
    std::size_t min_ofcs_per_patient = 1;
    std::size_t max_ofcs_per_patient = 2;
    std::size_t informative_features = 6;
    double separation = 4.0;
    std::size_t noise_features = 10;
    std::size_t binary_comorbidities = 0;
    double comorbidity_rate_pass = 0.2;
    double comorbidity_rate_fail = 0.6;
    double positive_rate = 0.86;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static SynthSpec from_json(const nlohmann::json& doc);
};

struct SynthResult {
    Table table;
    std::vector<std::string> informative_columns;
    std::vector<std::string> noise_columns;
    std::vector<std::string> comorbidity_columns;

    /// Ground-truth manifest naming which columns carry class signal.
    nlohmann::json manifest() const;
};

SynthResult generate(const SynthSpec& spec);

} // namespace ofc
