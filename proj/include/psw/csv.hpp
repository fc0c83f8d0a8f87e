#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psw/dataset.hpp"

namespace psw {

/// Column mapping from a CSV header to dataset roles.
struct ColumnMap {
    std::string treatment;
    std::string outcome;
    std::vector<std::string> covariates;
    std::optional<std::string> ps;
    std::optional<std::string> id;
};

/// Parsed CSV: header plus string cells (RFC-4180 quoting, comma
/// delimiter, '.' decimal point).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// Load and validate a dataset from a CSV file. Covariate column order is
/// preserved exactly as given in the mapping.
Dataset load_csv(const std::string& path, const ColumnMap& map,
                 OutcomeKind kind);

/// Write a dataset back to CSV with full precision; load_csv on the result
/// with the same mapping reproduces the dataset value-identically.
void write_csv(const std::string& path, const Dataset& d);

std::string csv_quote(const std::string& field);

}  // namespace psw
