#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "psw/csv.hpp"
#include "psw/dataset.hpp"

using namespace psw;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

bool report_mentions(const std::vector<std::string>& report,
                     const std::string& needle) {
    for (const auto& line : report)
        if (line.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
    const std::string path = temp_path("psw_small.csv");
    write_file(path, "A,Y,X1\n0,1.0,0\n1,2.0,1\n1,3.0,0\n");
    ColumnMap map{"A", "Y", {"X1"}, std::nullopt, std::nullopt};
    const Dataset d = load_csv(path, map, OutcomeKind::continuous);
    CHECK(d.n() == 3);
    CHECK(d.n_covariates() == 1);
    CHECK(d.treatment() == std::vector<int>{0, 1, 1});
    CHECK(d.outcome() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(d.covariate_column(0)[1] == 1.0);
    CHECK(d.n_treated() == 2);
    CHECK(d.validate().empty());
}

TEST_CASE("load_csv rejects bad treatment codes") {
    const std::string path = temp_path("psw_badtrt.csv");
    write_file(path, "A,Y,X1\n0,1.0,0\n2,2.0,1\n1,3.0,0\n");
    ColumnMap map{"A", "Y", {"X1"}, std::nullopt, std::nullopt};
    CHECK_THROWS_WITH_AS(load_csv(path, map, OutcomeKind::continuous),
                         doctest::Contains("treatment not in {0,1}"),
                         DataError);
}

TEST_CASE("load_csv rejects provided PS at the boundary") {
    const std::string path = temp_path("psw_badps.csv");
    write_file(path, "A,Y,X1,e\n0,1.0,0,0.4\n1,2.0,1,1.0\n1,3.0,0,0.6\n");
    ColumnMap map{"A", "Y", {"X1"}, "e", std::nullopt};
    CHECK_THROWS_WITH_AS(
        load_csv(path, map, OutcomeKind::continuous),
        doctest::Contains("provided PS must be in open interval (0,1)"),
        DataError);
}

TEST_CASE("load_csv reports missing columns, cells and non-numeric values") {
    const std::string path = temp_path("psw_badcells.csv");
    write_file(path, "A,Y,X1\n0,1.0,0\n1,,1\n");
    ColumnMap map{"A", "Y", {"X1"}, std::nullopt, std::nullopt};
    CHECK_THROWS_WITH_AS(load_csv(path, map, OutcomeKind::continuous),
                         doctest::Contains("missing value"), DataError);

    write_file(path, "A,Y,X1\n0,1.0,zero\n1,2.0,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path, map, OutcomeKind::continuous),
                         doctest::Contains("non-numeric"), DataError);

    ColumnMap missing{"A", "Y", {"X9"}, std::nullopt, std::nullopt};
    CHECK_THROWS_WITH_AS(load_csv(path, missing, OutcomeKind::continuous),
                         doctest::Contains("missing column 'X9'"), DataError);
}

TEST_CASE("binary outcomes must be coded 0/1") {
    DatasetDraft draft;
    draft.treatment = {0, 1};
    draft.outcome = {0.0, 0.5};
    draft.outcome_kind = OutcomeKind::binary;
    const auto report = Dataset::check(draft);
    CHECK(report_mentions(report, "binary outcome not in {0,1}"));
    CHECK(report_mentions(report, "row 1"));
}

TEST_CASE("check flags single-arm data and non-finite cells") {
    DatasetDraft draft;
    draft.treatment = {1, 1, 1};
    draft.outcome = {1.0, 2.0, 3.0};
    draft.covariate_names = {"X1"};
    draft.covariates = {0.0, 1.0, 2.0};
    CHECK(report_mentions(Dataset::check(draft), "no control units"));

    DatasetDraft nan_draft;
    nan_draft.treatment = {0, 1, 0, 1, 0, 1};
    nan_draft.outcome = {1, 2, 3, 4, 5, 6};
    nan_draft.covariate_names = {"X1"};
    nan_draft.covariates = {0, 1, 2, 3, 4, 5};
    nan_draft.covariates[5] = std::nan("");
    const auto report = Dataset::check(nan_draft);
    CHECK(report_mentions(report, "row 5"));
    CHECK(report_mentions(report, "non-finite"));
}

TEST_CASE("quoted fields and CRLF line endings parse") {
    const CsvTable t =
        parse_csv("\"a,b\",c\r\n\"1\",2\r\n\"say \"\"hi\"\"\",4\r\n");
    CHECK(t.header == std::vector<std::string>{"a,b", "c"});
    CHECK(t.rows[0][0] == "1");
    CHECK(t.rows[1][0] == "say \"hi\"");
}

TEST_CASE("dataset -> csv -> dataset round-trip is value-identical") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    DatasetDraft draft;
    draft.covariate_names = {"X1", "weird,name", "X3"};
    draft.provided_ps.emplace();
    const std::size_t n = 37;
    for (std::size_t i = 0; i < n; ++i) {
        draft.treatment.push_back(i % 3 == 0 ? 1.0 : 0.0);
        draft.outcome.push_back(unif(gen) / 3.0);
        for (int j = 0; j < 3; ++j) draft.covariates.push_back(unif(gen));
        draft.provided_ps->push_back(0.5 + unif(gen) / 11.0);
        draft.unit_ids.push_back("unit-" + std::to_string(i));
    }
    const Dataset d = Dataset::create(std::move(draft));

    const std::string path = temp_path("psw_roundtrip.csv");
    write_csv(path, d);
    ColumnMap map{"treatment", "outcome", d.covariate_names(), "ps", "id"};
    const Dataset back = load_csv(path, map, OutcomeKind::continuous);

    REQUIRE(back.n() == d.n());
    CHECK(back.treatment() == d.treatment());
    CHECK(back.outcome() == d.outcome());
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < n; ++i)
            CHECK(back.covariate_column(j)[i] == d.covariate_column(j)[i]);
    CHECK(back.provided_ps() == d.provided_ps());
    CHECK(back.unit_ids() == d.unit_ids());
}

TEST_CASE("construction enforces the validation report") {
    DatasetDraft draft;
    draft.treatment = {0};
    draft.outcome = {1.0};
    CHECK_THROWS_AS(Dataset::create(std::move(draft)), DataError);
}
