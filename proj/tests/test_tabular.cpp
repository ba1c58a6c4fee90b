#include "ofc/error.hpp"
#include "ofc/tabular.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace ofc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path dir = fs::temp_directory_path() / "ofckit_tabular_tests";
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::vector<ColumnSpec> basic_schema() {
    return {{"patient_id", ColumnKind::Identifier, ""},
            {"peanut_ige", ColumnKind::Numeric, "kU/L"},
            {"outcome", ColumnKind::Outcome, ""}};
}

Table numeric_table(const std::vector<double>& values) {
    Table t(basic_schema());
    for (std::size_t i = 0; i < values.size(); ++i) {
        RowMeta meta;
        meta.row_id = static_cast<std::int64_t>(i);
        t.append_row({std::string("P") + std::to_string(i), values[i],
                      i % 2 == 0 ? 1.0 : 0.0},
                     meta);
    }
    return t;
}

} // namespace

TEST_CASE("read_csv parses a small file") {
    const fs::path path = temp_file("basic.csv",
                                    "patient_id,peanut_ige,outcome\n"
                                    "P1,0.5,pass\n"
                                    "P2,2.5,fail\n"
                                    "P3,11,pass\n");
    const Table t = read_csv(path, basic_schema());
    CHECK(t.n_rows() == 3);
    CHECK(t.n_cols() == 3);
    CHECK(t.patient_id(0) == "P1");
    CHECK(t.number_at(1, 1) == doctest::Approx(2.5));
    CHECK(t.outcome01(0) == 1.0);
    CHECK(t.outcome01(1) == 0.0);
}

TEST_CASE("read_csv reports a missing declared column by name") {
    const fs::path path = temp_file("missing_col.csv",
                                    "patient_id,outcome\n"
                                    "P1,pass\n");
    auto schema = basic_schema();
    schema.push_back({"wheal", ColumnKind::Numeric, "mm"});
    try {
        read_csv(path, schema);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("wheal") != std::string::npos);
    }
}

TEST_CASE("read_csv keeps rows with unparseable numeric tokens as missing") {
    const fs::path path = temp_file("badtoken.csv",
                                    "patient_id,peanut_ige,outcome\n"
                                    "P1,abc,pass\n"
                                    "P2,1.5,fail\n");
    const Table t = read_csv(path, basic_schema());
    CHECK(t.n_rows() == 2);
    CHECK(is_missing(t.cell(0, 1)));
    CHECK(t.number_at(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("read_csv rejects duplicate header names") {
    const fs::path path = temp_file("dup.csv",
                                    "patient_id,peanut_ige,peanut_ige,outcome\n"
                                    "P1,1,2,pass\n");
    CHECK_THROWS_AS(read_csv(path, basic_schema()), ParseError);
}

TEST_CASE("read_csv on a nonexistent file is a validation error") {
    CHECK_THROWS_AS(read_csv("/nonexistent/nope.csv", basic_schema()), ValidationError);
}

TEST_CASE("normalize_censored handles censored bounds") {
    CHECK(normalize_censored("<0.35") == doctest::Approx(0.175).epsilon(1e-12));
    CHECK(normalize_censored(">100") == doctest::Approx(101.0).epsilon(1e-12));
    CHECK(normalize_censored("2.5") == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("normalize_censored is idempotent on its outputs") {
    for (const char* token : {"<0.35", ">100", "2.5", "<8", ">0.1"}) {
        const double once = normalize_censored(token);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", once);
        CHECK(normalize_censored(buf) == doctest::Approx(once).epsilon(1e-15));
    }
}

TEST_CASE("normalize_censored rejects malformed tokens") {
    CHECK_THROWS_AS(normalize_censored("<>1"), ParseError);
    CHECK_THROWS_AS(normalize_censored("abc"), ParseError);
    CHECK_THROWS_AS(normalize_censored(""), ParseError);
    CHECK_THROWS_AS(normalize_censored("<abc"), ParseError);
}

TEST_CASE("binarize maps the four recognized tokens") {
    CHECK(binarize("Yes") == 1.0);
    CHECK(binarize("No") == 0.0);
    CHECK(binarize("Checked") == 1.0);
    CHECK(binarize("Unchecked") == 0.0);
    CHECK(binarize("yes") == 1.0);
    CHECK(binarize("UNCHECKED") == 0.0);
    CHECK_THROWS_AS(binarize("maybe"), ParseError);
}

TEST_CASE("drop_incomplete keeps exactly the complete rows in order") {
    Table t(basic_schema());
    for (int i = 0; i < 5; ++i) {
        RowMeta meta;
        meta.row_id = i;
        Cell value = (i == 1 || i == 3) ? Cell{} : Cell{static_cast<double>(i)};
        t.append_row({std::string("P") + std::to_string(i), value, 1.0}, meta);
    }
    const Table kept = drop_incomplete(t);
    CHECK(kept.n_rows() == 3);
    CHECK(kept.meta(0).row_id == 0);
    CHECK(kept.meta(1).row_id == 2);
    CHECK(kept.meta(2).row_id == 4);
}

TEST_CASE("drop_incomplete is the identity on complete tables and idempotent") {
    const Table t = numeric_table({1.0, 2.0, 3.0});
    const Table once = drop_incomplete(t);
    CHECK(once.n_rows() == t.n_rows());
    const Table twice = drop_incomplete(once);
    CHECK(twice.n_rows() == once.n_rows());
}

TEST_CASE("drop_incomplete with nothing left is an error") {
    Table t(basic_schema());
    RowMeta meta;
    t.append_row({std::string("P1"), Cell{}, 1.0}, meta);
    CHECK_THROWS_AS(drop_incomplete(t), ValidationError);
}

TEST_CASE("standardize maps the fitted mean to zero") {
    const Table train = numeric_table({1.0, 2.0, 3.0});
    const ScalerParams params = standardize_fit(train, {"peanut_ige"});
    const Table probe = numeric_table({2.0});
    const Table scaled = standardize_apply(probe, params);
    CHECK(scaled.number_at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("standardized training columns have mean zero") {
    const Table train = numeric_table({4.0, 9.5, -3.0, 0.25, 7.75, 2.0});
    const ScalerParams params = standardize_fit(train, {"peanut_ige"});
    const Table scaled = standardize_apply(train, params);
    double sum = 0.0;
    for (std::size_t r = 0; r < scaled.n_rows(); ++r) sum += scaled.number_at(r, 1);
    CHECK(std::abs(sum / static_cast<double>(scaled.n_rows())) < 1e-9);
}

TEST_CASE("train params applied to disjoint data generally shift the mean") {
    const Table train = numeric_table({1.0, 2.0, 3.0});
    const ScalerParams params = standardize_fit(train, {"peanut_ige"});
    const Table test = numeric_table({10.0, 11.0, 12.0});
    const Table scaled = standardize_apply(test, params);
    double sum = 0.0;
    for (std::size_t r = 0; r < scaled.n_rows(); ++r) sum += scaled.number_at(r, 1);
    CHECK(std::abs(sum / 3.0) > 1.0);
}

TEST_CASE("standardize round-trips non-constant columns within 1e-9") {
    const Table train = numeric_table({4.0, 9.5, -3.0, 0.25});
    const ScalerParams params = standardize_fit(train, {"peanut_ige"});
    const Table scaled = standardize_apply(train, params);
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        const double back = scaled.number_at(r, 1) * params.stddev[0] + params.mean[0];
        CHECK(back == doctest::Approx(train.number_at(r, 1)).epsilon(1e-9));
    }
}

TEST_CASE("constant columns standardize to zero") {
    const Table train = numeric_table({5.0, 5.0, 5.0});
    const ScalerParams params = standardize_fit(train, {"peanut_ige"});
    CHECK(params.constant[0] == 1);
    const Table scaled = standardize_apply(train, params);
    for (std::size_t r = 0; r < scaled.n_rows(); ++r) {
        CHECK(scaled.number_at(r, 1) == 0.0);
    }
}

TEST_CASE("standardize_fit rejects unknown columns") {
    const Table train = numeric_table({1.0, 2.0});
    CHECK_THROWS_AS(standardize_fit(train, {"mystery"}), ValidationError);
}

TEST_CASE("drop_columns removes named columns and reports unknown ones") {
    std::vector<ColumnSpec> schema = basic_schema();
    schema.insert(schema.begin() + 2, {"score", ColumnKind::Numeric, ""});
    Table t(schema);
    RowMeta meta;
    t.append_row({std::string("P1"), 1.0, 99.0, 1.0}, meta);
    const Table out = drop_columns(t, {"score"});
    CHECK(out.n_cols() == 3);
    CHECK_FALSE(out.has_column("score"));
    CHECK(out.number_at(0, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(drop_columns(t, {"absent"}), ValidationError);
}

TEST_CASE("one_hot_encode expands categoricals into sorted indicator columns") {
    std::vector<ColumnSpec> schema = basic_schema();
    schema.insert(schema.begin() + 2, {"race", ColumnKind::Categorical, ""});
    Table t(schema);
    RowMeta meta;
    t.append_row({std::string("P1"), 1.0, std::string("b"), 1.0}, meta);
    t.append_row({std::string("P2"), 2.0, std::string("a"), 0.0}, meta);
    t.append_row({std::string("P3"), 3.0, std::string("b"), 1.0}, meta);
    const Table out = one_hot_encode(t);
    CHECK(out.has_column("race=a"));
    CHECK(out.has_column("race=b"));
    CHECK_FALSE(out.has_column("race"));
    CHECK(out.number_at(0, out.column_index("race=b")) == 1.0);
    CHECK(out.number_at(1, out.column_index("race=b")) == 0.0);
    CHECK(out.number_at(1, out.column_index("race=a")) == 1.0);
}

TEST_CASE("schema files round-trip") {
    const fs::path dir = fs::temp_directory_path() / "ofckit_tabular_tests";
    fs::create_directories(dir);
    const fs::path path = dir / "round.schema.json";
    write_schema(basic_schema(), path);
    const auto schema = read_schema(path);
    REQUIRE(schema.size() == 3);
    CHECK(schema[0].name == "patient_id");
    CHECK(schema[0].kind == ColumnKind::Identifier);
    CHECK(schema[1].unit == "kU/L");
    CHECK(schema[2].kind == ColumnKind::Outcome);
}

TEST_CASE("csv files round-trip through write and read") {
    const Table t = numeric_table({1.25, -2.5, 3.75});
    const fs::path dir = fs::temp_directory_path() / "ofckit_tabular_tests";
    fs::create_directories(dir);
    const fs::path path = dir / "round.csv";
    write_csv(t, path, {"comment line"});
    const Table back = read_csv(path, basic_schema());
    REQUIRE(back.n_rows() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(back.number_at(r, 1) == t.number_at(r, 1));
        CHECK(back.outcome01(r) == t.outcome01(r));
    }
}

TEST_CASE("schema validation requires exactly one outcome and identifier") {
    std::vector<ColumnSpec> no_outcome = {{"patient_id", ColumnKind::Identifier, ""},
                                          {"x", ColumnKind::Numeric, ""}};
    CHECK_THROWS_AS(Table{no_outcome}, ValidationError);
    std::vector<ColumnSpec> dup = basic_schema();
    dup.push_back({"peanut_ige", ColumnKind::Numeric, ""});
    CHECK_THROWS_AS(Table{dup}, ValidationError);
}

TEST_CASE("require_no_test_rows flags test-tagged rows") {
    Table t = numeric_table({1.0, 2.0});
    CHECK_NOTHROW(require_no_test_rows(t, "probe"));
    t.meta(1).set_tag = SetTag::Test;
    CHECK_THROWS_AS(require_no_test_rows(t, "probe"), LeakageError);
}
