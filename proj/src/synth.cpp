#include "ofc/synth.hpp"

#include "ofc/error.hpp"
#include "ofc/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <string>

namespace ofc {

namespace {

std::string feature_name(const char* prefix, std::size_t index) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_%02zu", prefix, index + 1);
    return buf;
}

std::string patient_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P%05zu", index + 1);
    return buf;
}

} // namespace

void SynthSpec::validate() const {
    if (patients == 0) throw ValidationError("synthetic spec requires at least one patient");
    if (informative_features == 0) {
        throw ValidationError("synthetic spec requires at least one informative feature");
    }
    if (min_ofcs_per_patient < 1 || max_ofcs_per_patient < min_ofcs_per_patient) {
        throw ValidationError("synthetic spec requires 1 <= min_ofcs <= max_ofcs");
    }
    if (positive_rate <= 0.0 || positive_rate >= 1.0) {
        throw ValidationError("positive_rate must lie in (0, 1)");
    }
    if (separation < 0.0) throw ValidationError("separation must be >= 0");
    if (comorbidity_rate_pass < 0.0 || comorbidity_rate_pass > 1.0 ||
        comorbidity_rate_fail < 0.0 || comorbidity_rate_fail > 1.0) {
        throw ValidationError("comorbidity rates must lie in [0, 1]");
    }
}

nlohmann::json SynthSpec::to_json() const {
    return {{"patients", patients},
            {"min_ofcs_per_patient", min_ofcs_per_patient},
            {"max_ofcs_per_patient", max_ofcs_per_patient},
            {"informative_features", informative_features},
            {"separation", separation},
            {"noise_features", noise_features},
            {"binary_comorbidities", binary_comorbidities},
            {"comorbidity_rate_pass", comorbidity_rate_pass},
            {"comorbidity_rate_fail", comorbidity_rate_fail},
            {"positive_rate", positive_rate},
            {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& doc) {
    SynthSpec spec;
    static const char* known[] = {"patients",
                                  "min_ofcs_per_patient",
                                  "max_ofcs_per_patient",
                                  "informative_features",
                                  "separation",
                                  "noise_features",
                                  "binary_comorbidities",
                                  "comorbidity_rate_pass",
                                  "comorbidity_rate_fail",
                                  "positive_rate",
                                  "seed"};
    for (const auto& [key, value] : doc.items()) {
        bool found = false;
        for (const char* k : known) found = found || key == k;
        if (!found) throw ValidationError("unknown synthetic spec key '" + key + "'");
    }
    spec.patients = doc.value("patients", spec.patients);
    spec.min_ofcs_per_patient = doc.value("min_ofcs_per_patient", spec.min_ofcs_per_patient);
    spec.max_ofcs_per_patient = doc.value("max_ofcs_per_patient", spec.max_ofcs_per_patient);
    spec.informative_features = doc.value("informative_features", spec.informative_features);
    spec.separation = doc.value("separation", spec.separation);
    spec.noise_features = doc.value("noise_features", spec.noise_features);
    spec.binary_comorbidities = doc.value("binary_comorbidities", spec.binary_comorbidities);
    spec.comorbidity_rate_pass = doc.value("comorbidity_rate_pass", spec.comorbidity_rate_pass);
    spec.comorbidity_rate_fail = doc.value("comorbidity_rate_fail", spec.comorbidity_rate_fail);
    spec.positive_rate = doc.value("positive_rate", spec.positive_rate);
    spec.seed = doc.value("seed", spec.seed);
    spec.validate();
    return spec;
}

nlohmann::json SynthResult::manifest() const {
    return {{"informative", informative_columns},
            {"noise", noise_columns},
            {"comorbidity", comorbidity_columns}};
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();

    SynthResult result;
    std::vector<ColumnSpec> schema;
    schema.push_back({"patient_id", ColumnKind::Identifier, ""});
    for (std::size_t j = 0; j < spec.informative_features; ++j) {
        result.informative_columns.push_back(feature_name("info", j));
        schema.push_back({result.informative_columns.back(), ColumnKind::Numeric, ""});
    }
    for (std::size_t j = 0; j < spec.noise_features; ++j) {
        result.noise_columns.push_back(feature_name("noise", j));
        schema.push_back({result.noise_columns.back(), ColumnKind::Numeric, ""});
    }
    for (std::size_t j = 0; j < spec.binary_comorbidities; ++j) {
        result.comorbidity_columns.push_back(feature_name("comorb", j));
        schema.push_back({result.comorbidity_columns.back(), ColumnKind::Binary, ""});
    }
    schema.push_back({"outcome", ColumnKind::Outcome, ""});

    Table table(schema);
    rng::Stream stream(rng::SeedChain(spec.seed).mix("synth").value());
    std::int64_t row_id = 0;
    const std::size_t ofc_spread = spec.max_ofcs_per_patient - spec.min_ofcs_per_patient + 1;
    for (std::size_t p = 0; p < spec.patients; ++p) {
        const std::string pid = patient_name(p);
        const std::size_t n_ofcs =
            spec.min_ofcs_per_patient + static_cast<std::size_t>(stream.uniform_int(ofc_spread));
        for (std::size_t o = 0; o < n_ofcs; ++o) {
            const int outcome = stream.uniform() < spec.positive_rate ? 1 : 0;
            std::vector<Cell> cells;
            cells.reserve(schema.size());
            cells.emplace_back(pid);
            for (std::size_t j = 0; j < spec.informative_features; ++j) {
                // Alternate association direction so both signs occur.
                const double sign = j % 2 == 0 ? 1.0 : -1.0;
                const double mean = (outcome == 1 ? 0.5 : -0.5) * sign * spec.separation;
                cells.emplace_back(mean + stream.normal());
            }
            for (std::size_t j = 0; j < spec.noise_features; ++j) {
                cells.emplace_back(stream.normal());
            }
            for (std::size_t j = 0; j < spec.binary_comorbidities; ++j) {
                const double rate = outcome == 1 ? spec.comorbidity_rate_pass
                                                 : spec.comorbidity_rate_fail;
                cells.emplace_back(stream.uniform() < rate ? 1.0 : 0.0);
            }
            cells.emplace_back(static_cast<double>(outcome));
            RowMeta meta;
            meta.row_id = row_id++;
            table.append_row(std::move(cells), meta);
        }
    }
    result.table = std::move(table);
    return result;
}

} // namespace ofc
