#include "ofc/tabular.hpp"

#include "ofc/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ofc {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) return std::nullopt;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool token_missing(const std::string& token) {
    const std::string t = trim(token);
    return t.empty() || t == "NA";
}

} // namespace

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Numeric: return "numeric";
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Identifier: return "identifier";
        case ColumnKind::Outcome: return "outcome";
    }
    return "unknown";
}

ColumnKind column_kind_from_string(std::string_view token) {
    const std::string t = lower(token);
    if (t == "numeric") return ColumnKind::Numeric;
    if (t == "binary") return ColumnKind::Binary;
    if (t == "categorical") return ColumnKind::Categorical;
    if (t == "identifier") return ColumnKind::Identifier;
    if (t == "outcome") return ColumnKind::Outcome;
    throw ParseError("unknown column kind: '" + std::string(token) + "'");
}

std::string_view to_string(SetTag tag) {
    switch (tag) {
        case SetTag::Unassigned: return "unassigned";
        case SetTag::FeatureSelection: return "feature_selection";
        case SetTag::TrainVal: return "train_val";
        case SetTag::Test: return "test";
    }
    return "unknown";
}

Table::Table(std::vector<ColumnSpec> schema) : schema_(std::move(schema)) {
    validate_schema();
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].kind == ColumnKind::Outcome) outcome_idx_ = i;
        if (schema_[i].kind == ColumnKind::Identifier) identifier_idx_ = i;
    }
}

void Table::validate_schema() const {
    std::unordered_set<std::string> seen;
    std::size_t outcomes = 0;
    std::size_t identifiers = 0;
    for (const auto& col : schema_) {
        if (!seen.insert(col.name).second) {
            throw ValidationError("duplicate column name in schema: '" + col.name + "'");
        }
        if (col.kind == ColumnKind::Outcome) ++outcomes;
        if (col.kind == ColumnKind::Identifier) ++identifiers;
    }
    if (outcomes != 1) {
        throw ValidationError("schema must declare exactly one outcome column, found " +
                              std::to_string(outcomes));
    }
    if (identifiers != 1) {
        throw ValidationError("schema must declare exactly one identifier column, found " +
                              std::to_string(identifiers));
    }
}

std::size_t Table::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == name) return i;
    }
    throw ValidationError("unknown column: '" + std::string(name) + "'");
}

bool Table::has_column(std::string_view name) const {
    return std::any_of(schema_.begin(), schema_.end(),
                       [&](const ColumnSpec& c) { return c.name == name; });
}

void Table::append_row(std::vector<Cell> cells, RowMeta meta) {
    if (cells.size() != schema_.size()) {
        throw ValidationError("row width " + std::to_string(cells.size()) +
                              " does not match schema width " + std::to_string(schema_.size()));
    }
    rows_.push_back(std::move(cells));
    meta_.push_back(meta);
}

const std::string& Table::patient_id(std::size_t row) const {
    const Cell& c = rows_[row][identifier_idx_];
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    throw ValidationError("missing patient id in row " + std::to_string(row));
}

double Table::outcome01(std::size_t row) const { return number_at(row, outcome_idx_); }

double Table::number_at(std::size_t row, std::size_t col) const {
    const Cell& c = rows_[row][col];
    if (const auto* v = std::get_if<double>(&c)) return *v;
    throw ValidationError("cell (" + std::to_string(row) + ", '" + schema_[col].name +
                          "') holds no number");
}

std::size_t Table::count_incomplete_rows() const {
    std::size_t n = 0;
    for (const auto& row : rows_) {
        if (std::any_of(row.begin(), row.end(), [](const Cell& c) { return is_missing(c); })) ++n;
    }
    return n;
}

Table Table::subset(const std::vector<std::size_t>& rows) const {
    Table out(schema_);
    for (std::size_t r : rows) {
        if (r >= n_rows()) throw ValidationError("subset row index out of range");
        out.append_row(rows_[r], meta_[r]);
    }
    return out;
}

std::vector<std::vector<double>> Table::matrix(const std::vector<std::string>& columns) const {
    std::vector<std::size_t> idx;
    idx.reserve(columns.size());
    for (const auto& name : columns) idx.push_back(column_index(name));
    std::vector<std::vector<double>> out(n_rows(), std::vector<double>(columns.size()));
    for (std::size_t r = 0; r < n_rows(); ++r) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out[r][j] = number_at(r, idx[j]);
        }
    }
    return out;
}

std::vector<int> Table::labels01() const {
    std::vector<int> out(n_rows());
    for (std::size_t r = 0; r < n_rows(); ++r) out[r] = outcome01(r) > 0.5 ? 1 : 0;
    return out;
}

std::vector<std::string> Table::feature_names() const {
    std::vector<std::string> out;
    for (const auto& col : schema_) {
        if (col.kind == ColumnKind::Numeric || col.kind == ColumnKind::Binary) {
            out.push_back(col.name);
        }
    }
    return out;
}

double normalize_censored(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) throw ParseError("empty token is not a number");
    if (t[0] == '<' || t[0] == '>') {
        auto bound = parse_number(t.substr(1));
        if (!bound) throw ParseError("malformed censored value: '" + token + "'");
        return t[0] == '<' ? *bound / 2.0 : *bound + 1.0;
    }
    auto value = parse_number(t);
    if (!value) throw ParseError("malformed numeric value: '" + token + "'");
    return *value;
}

double binarize(const std::string& token) {
    const std::string t = lower(trim(token));
    if (t == "yes" || t == "checked") return 1.0;
    if (t == "no" || t == "unchecked") return 0.0;
    throw ParseError("not a recognized binary token: '" + token + "'");
}

namespace {

/// Parses one CSV record (RFC-4180 quoting); multi-line quoted fields are
/// handled by the caller feeding more input.
std::vector<std::string> split_csv_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

Cell parse_cell(const std::string& token, ColumnKind kind) {
    if (token_missing(token)) return Cell{std::monostate{}};
    switch (kind) {
        case ColumnKind::Numeric:
            try {
                return Cell{normalize_censored(token)};
            } catch (const ParseError&) {
                return Cell{std::monostate{}};
            }
        case ColumnKind::Binary: {
            try {
                return Cell{binarize(token)};
            } catch (const ParseError&) {
            }
            auto v = parse_number(token);
            if (v && (*v == 0.0 || *v == 1.0)) return Cell{*v};
            return Cell{std::monostate{}};
        }
        case ColumnKind::Categorical:
            return Cell{trim(token)};
        case ColumnKind::Identifier:
            return Cell{trim(token)};
        case ColumnKind::Outcome: {
            const std::string t = lower(trim(token));
            if (t == "pass") return Cell{1.0};
            if (t == "fail") return Cell{0.0};
            auto v = parse_number(token);
            if (v && (*v == 0.0 || *v == 1.0)) return Cell{*v};
            return Cell{std::monostate{}};
        }
    }
    return Cell{std::monostate{}};
}

std::string render_cell(const Cell& cell, ColumnKind kind) {
    if (is_missing(cell)) return "";
    if (const auto* s = std::get_if<std::string>(&cell)) {
        if (s->find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : *s) {
                if (c == '"') quoted += "\"\"";
                else quoted.push_back(c);
            }
            quoted.push_back('"');
            return quoted;
        }
        return *s;
    }
    double v = std::get<double>(cell);
    if (kind == ColumnKind::Outcome) return v > 0.5 ? "pass" : "fail";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Table read_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path.string());

    std::string line;
    // Header (skip leading comment lines so provenance headers round-trip).
    do {
        if (!std::getline(in, line)) throw ParseError("empty CSV file: " + path.string());
    } while (!line.empty() && line[0] == '#');

    std::vector<std::string> header = split_csv_record(line);
    for (auto& h : header) h = trim(h);

    std::unordered_map<std::string, std::size_t> header_pos;
    std::vector<std::string> duplicates;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!header_pos.emplace(header[i], i).second) duplicates.push_back(header[i]);
    }
    if (!duplicates.empty()) {
        std::string msg = "duplicate CSV header names:";
        for (const auto& d : duplicates) msg += " '" + d + "'";
        throw ParseError(msg);
    }

    std::vector<std::string> missing_cols;
    for (const auto& col : schema) {
        if (!header_pos.count(col.name)) missing_cols.push_back(col.name);
    }
    std::vector<std::string> extra_cols;
    std::unordered_set<std::string> schema_names;
    for (const auto& col : schema) schema_names.insert(col.name);
    for (const auto& h : header) {
        if (!schema_names.count(h)) extra_cols.push_back(h);
    }
    if (!missing_cols.empty() || !extra_cols.empty()) {
        std::string msg = "CSV header does not match schema;";
        if (!missing_cols.empty()) {
            msg += " missing:";
            for (const auto& c : missing_cols) msg += " '" + c + "'";
        }
        if (!extra_cols.empty()) {
            msg += " unexpected:";
            for (const auto& c : extra_cols) msg += " '" + c + "'";
        }
        throw ParseError(msg);
    }

    Table table(schema);
    std::int64_t next_id = 0;
    while (std::getline(in, line)) {
        // Continue reading while inside an unterminated quoted field.
        while (std::count(line.begin(), line.end(), '"') % 2 != 0 && !in.eof()) {
            std::string more;
            if (!std::getline(in, more)) break;
            line += "\n" + more;
        }
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_record(line);
        if (fields.size() != header.size()) {
            throw ParseError("CSV row " + std::to_string(next_id + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }
        std::vector<Cell> cells(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            cells[j] = parse_cell(fields[header_pos.at(schema[j].name)], schema[j].kind);
        }
        table.append_row(std::move(cells), RowMeta{next_id, SetTag::Unassigned, false});
        ++next_id;
    }
    return table;
}

void write_csv(const Table& table, const std::filesystem::path& path,
               const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write CSV file: " + path.string());
    for (const auto& c : header_comments) out << "# " << c << "\n";
    const auto& schema = table.schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        out << (j ? "," : "") << schema[j].name;
    }
    out << "\n";
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            out << (j ? "," : "") << render_cell(table.cell(r, j), schema[j].kind);
        }
        out << "\n";
    }
}

std::vector<ColumnSpec> read_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open schema file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("schema file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.contains("columns") || !doc["columns"].is_array()) {
        throw ParseError("schema file must contain a 'columns' array");
    }
    std::vector<ColumnSpec> schema;
    for (const auto& item : doc["columns"]) {
        ColumnSpec col;
        col.name = item.at("name").get<std::string>();
        col.kind = column_kind_from_string(item.at("kind").get<std::string>());
        if (item.contains("unit")) col.unit = item["unit"].get<std::string>();
        schema.push_back(std::move(col));
    }
    return schema;
}

void write_schema(const std::vector<ColumnSpec>& schema, const std::filesystem::path& path) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& col : schema) {
        nlohmann::json item{{"name", col.name}, {"kind", std::string(to_string(col.kind))}};
        if (!col.unit.empty()) item["unit"] = col.unit;
        cols.push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write schema file: " + path.string());
    out << nlohmann::json{{"columns", cols}}.dump(2) << "\n";
}

Table drop_incomplete(const Table& table) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto& row = table.row(r);
        if (std::none_of(row.begin(), row.end(), [](const Cell& c) { return is_missing(c); })) {
            keep.push_back(r);
        }
    }
    if (keep.empty()) {
        throw ValidationError("no complete rows remain after dropping incomplete rows");
    }
    return table.subset(keep);
}

Table drop_columns(const Table& table, const std::vector<std::string>& names) {
    std::set<std::string> to_drop(names.begin(), names.end());
    for (const auto& name : names) {
        if (!table.has_column(name)) {
            throw ValidationError("cannot drop unknown column: '" + name + "'");
        }
    }
    std::vector<ColumnSpec> schema;
    std::vector<std::size_t> keep_idx;
    for (std::size_t j = 0; j < table.schema().size(); ++j) {
        if (!to_drop.count(table.schema()[j].name)) {
            schema.push_back(table.schema()[j]);
            keep_idx.push_back(j);
        }
    }
    Table out(schema); // re-validates outcome/identifier presence
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<Cell> cells;
        cells.reserve(keep_idx.size());
        for (std::size_t j : keep_idx) cells.push_back(table.cell(r, j));
        out.append_row(std::move(cells), table.meta(r));
    }
    return out;
}

Table one_hot_encode(const Table& table) {
    // Collect observed tokens per categorical column, sorted for stable
    // output column order.
    std::vector<std::size_t> cat_idx;
    for (std::size_t j = 0; j < table.schema().size(); ++j) {
        if (table.schema()[j].kind == ColumnKind::Categorical) cat_idx.push_back(j);
    }
    if (cat_idx.empty()) return table;

    std::map<std::size_t, std::vector<std::string>> tokens;
    for (std::size_t j : cat_idx) {
        std::set<std::string> seen;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const Cell& c = table.cell(r, j);
            if (is_missing(c)) {
                throw ValidationError("one-hot encoding requires complete categorical column '" +
                                      table.schema()[j].name + "'");
            }
            seen.insert(std::get<std::string>(c));
        }
        tokens[j] = {seen.begin(), seen.end()};
    }

    std::vector<ColumnSpec> schema;
    for (std::size_t j = 0; j < table.schema().size(); ++j) {
        if (table.schema()[j].kind != ColumnKind::Categorical) {
            schema.push_back(table.schema()[j]);
        } else {
            for (const auto& t : tokens[j]) {
                schema.push_back({table.schema()[j].name + "=" + t, ColumnKind::Binary, ""});
            }
        }
    }
    Table out(schema);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<Cell> cells;
        cells.reserve(schema.size());
        for (std::size_t j = 0; j < table.schema().size(); ++j) {
            if (table.schema()[j].kind != ColumnKind::Categorical) {
                cells.push_back(table.cell(r, j));
            } else {
                const auto& value = std::get<std::string>(table.cell(r, j));
                for (const auto& t : tokens[j]) cells.push_back(Cell{value == t ? 1.0 : 0.0});
            }
        }
        out.append_row(std::move(cells), table.meta(r));
    }
    return out;
}

ScalerParams standardize_fit(const Table& table, const std::vector<std::string>& numeric_columns) {
    require_no_test_rows(table, "standardize_fit");
    ScalerParams params;
    for (const auto& name : numeric_columns) {
        const std::size_t j = table.column_index(name);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const Cell& c = table.cell(r, j);
            if (is_missing(c)) continue;
            sum += std::get<double>(c);
            ++n;
        }
        if (n == 0) throw ValidationError("cannot standardize empty column '" + name + "'");
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const Cell& c = table.cell(r, j);
            if (is_missing(c)) continue;
            const double d = std::get<double>(c) - mean;
            ss += d * d;
        }
        const double stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        params.names.push_back(name);
        params.mean.push_back(mean);
        params.stddev.push_back(stddev);
        params.constant.push_back(stddev == 0.0 ? 1 : 0);
    }
    return params;
}

Table standardize_apply(const Table& table, const ScalerParams& params) {
    std::vector<std::size_t> idx;
    idx.reserve(params.names.size());
    for (const auto& name : params.names) idx.push_back(table.column_index(name));

    Table out(table.schema());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<Cell> cells = table.row(r);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Cell& c = cells[idx[k]];
            if (is_missing(c)) continue;
            const double x = std::get<double>(c);
            c = params.constant[k] ? 0.0 : (x - params.mean[k]) / params.stddev[k];
        }
        out.append_row(std::move(cells), table.meta(r));
    }
    return out;
}

void require_no_test_rows(const Table& table, std::string_view operation) {
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (table.meta(r).set_tag == SetTag::Test) {
            throw LeakageError(std::string(operation) + " received a test-tagged row (row_id " +
                               std::to_string(table.meta(r).row_id) + ")");
        }
    }
}

} // namespace ofc
