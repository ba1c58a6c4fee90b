#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ofc {

enum class ColumnKind { Numeric, Binary, Categorical, Identifier, Outcome };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view token);

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::string unit; // optional, informational only
};

/// A cell is missing, a number (numeric/binary/outcome columns), or a
/// token (categorical/identifier columns).
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }

/// Which top-level partition a row currently belongs to. Stamped by the
/// pipeline after partitioning; fit-time operations refuse Test rows.
enum class SetTag : std::uint8_t { Unassigned, FeatureSelection, TrainVal, Test };

std::string_view to_string(SetTag tag);

struct RowMeta {
    std::int64_t row_id = -1;   // stable id from ingestion, survives subsetting
    SetTag set_tag = SetTag::Unassigned;
    bool synthetic = false;     // true for SMOTE-generated rows
};

/// Column-typed table. Immutable in normal use: preprocessing operations
/// return new tables rather than mutating their input.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<ColumnSpec> schema);

    const std::vector<ColumnSpec>& schema() const { return schema_; }
    std::size_t n_rows() const { return rows_.size(); }
    std::size_t n_cols() const { return schema_.size(); }

    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;
    std::size_t outcome_index() const { return outcome_idx_; }
    std::size_t identifier_index() const { return identifier_idx_; }

    const Cell& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    const std::vector<Cell>& row(std::size_t r) const { return rows_[r]; }
    const RowMeta& meta(std::size_t r) const { return meta_[r]; }
    RowMeta& meta(std::size_t r) { return meta_[r]; }

    void append_row(std::vector<Cell> cells, RowMeta meta);

    /// Patient id token of a row (identifier column).
    const std::string& patient_id(std::size_t row) const;

    /// Outcome as 1 (pass) / 0 (fail). Throws on missing outcome.
    double outcome01(std::size_t row) const;

    /// Numeric value of a numeric/binary/outcome cell. Throws on missing.
    double number_at(std::size_t row, std::size_t col) const;

    /// Rows with any missing cell count.
    std::size_t count_incomplete_rows() const;

    Table subset(const std::vector<std::size_t>& rows) const;

    /// Dense matrix view of the named columns (all must be numeric-valued
    /// and complete). Row-major.
    std::vector<std::vector<double>> matrix(const std::vector<std::string>& columns) const;

    /// Outcome vector, 1 = pass, 0 = fail.
    std::vector<int> labels01() const;

    /// Feature columns usable for modeling: numeric and binary kinds, in
    /// schema order.
    std::vector<std::string> feature_names() const;

private:
    void validate_schema() const;

    std::vector<ColumnSpec> schema_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<RowMeta> meta_;
    std::size_t outcome_idx_ = 0;
    std::size_t identifier_idx_ = 0;
};

/// "<x" halves the censoring bound, ">x" adds one, plain numbers pass
/// through. Throws ParseError on anything else.
double normalize_censored(const std::string& token);

/// Yes/Checked -> 1, No/Unchecked -> 0 (case-insensitive).
double binarize(const std::string& token);

/// RFC-4180-style CSV with a header row; missing = empty or "NA".
/// Header names must match the schema names (any order); the resulting
/// table uses schema column order. Unparseable tokens become missing
/// cells, the row is retained.
Table read_csv(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema);

void write_csv(const Table& table, const std::filesystem::path& path,
               const std::vector<std::string>& header_comments = {});

/// Schema file: JSON document {"columns": [{"name", "kind", "unit"?}]}.
std::vector<ColumnSpec> read_schema(const std::filesystem::path& path);
void write_schema(const std::vector<ColumnSpec>& schema, const std::filesystem::path& path);

/// Keeps exactly the complete rows, original order. Throws if nothing
/// survives.
Table drop_incomplete(const Table& table);

/// Removes the named columns (e.g. a redundant composite score). Unknown
/// names are reported, not ignored.
Table drop_columns(const Table& table, const std::vector<std::string>& names);

/// Expands every categorical column into one binary column per observed
/// token ("col=token", tokens sorted). Requires complete categoricals.
Table one_hot_encode(const Table& table);

struct ScalerParams {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> stddev;          // sample std (n-1 divisor)
    std::vector<std::uint8_t> constant;  // flagged when std == 0
};

ScalerParams standardize_fit(const Table& table, const std::vector<std::string>& numeric_columns);

/// x -> (x - mean) / std with the fitted params only; constant columns
/// map to 0. Missing cells stay missing.
Table standardize_apply(const Table& table, const ScalerParams& params);

/// Throws LeakageError if any row is tagged Test. Fit-time operations
/// call this before touching values.
void require_no_test_rows(const Table& table, std::string_view operation);

} // namespace ofc
