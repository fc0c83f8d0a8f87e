#include "psw/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace psw {

namespace {

// RFC-4180 field splitter for one buffer; handles quoted fields, embedded
// commas/newlines and doubled quotes.
std::vector<std::vector<std::string>> split_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (row.size() > 1 || !row[0].empty()) records.push_back(row);
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (!field.empty() && field.back() == '\r') field.pop_back();
    if (!field.empty() || !row.empty()) end_row();
    if (in_quotes) throw DataError("malformed CSV: unterminated quoted field");
    return records;
}

double parse_cell(const std::string& cell, std::size_t row,
                  const std::string& col) {
    if (cell.empty()) {
        std::ostringstream os;
        os << "row " << row << ": missing value in column '" << col << "'";
        throw DataError(os.str());
    }
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + cell.size() || errno == ERANGE) {
        std::ostringstream os;
        os << "row " << row << ": non-numeric value '" << cell
           << "' in column '" << col << "'";
        throw DataError(os.str());
    }
    return v;
}

std::size_t column_of(const CsvTable& table, const std::string& name) {
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (table.header[j] == name) return j;
    throw DataError("missing column '" + name + "'");
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    auto records = split_records(text);
    if (records.empty()) throw DataError("empty CSV input");
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size()) {
            std::ostringstream os;
            os << "row " << r - 1 << ": expected " << table.header.size()
               << " fields, found " << records[r].size();
            throw DataError(os.str());
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

Dataset load_csv(const std::string& path, const ColumnMap& map,
                 OutcomeKind kind) {
    const CsvTable table = read_csv_table(path);
    const std::size_t a_col = column_of(table, map.treatment);
    const std::size_t y_col = column_of(table, map.outcome);
    std::vector<std::size_t> x_cols;
    for (const auto& name : map.covariates)
        x_cols.push_back(column_of(table, name));
    std::optional<std::size_t> ps_col;
    if (map.ps) ps_col = column_of(table, *map.ps);
    std::optional<std::size_t> id_col;
    if (map.id) id_col = column_of(table, *map.id);

    DatasetDraft draft;
    draft.outcome_kind = kind;
    draft.covariate_names = map.covariates;
    if (ps_col) draft.provided_ps.emplace();
    const std::size_t n = table.rows.size();
    draft.treatment.reserve(n);
    draft.outcome.reserve(n);
    draft.covariates.reserve(n * x_cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        draft.treatment.push_back(parse_cell(row[a_col], i, map.treatment));
        draft.outcome.push_back(parse_cell(row[y_col], i, map.outcome));
        for (std::size_t j = 0; j < x_cols.size(); ++j)
            draft.covariates.push_back(
                parse_cell(row[x_cols[j]], i, map.covariates[j]));
        if (ps_col)
            draft.provided_ps->push_back(parse_cell(row[*ps_col], i, *map.ps));
        if (id_col) draft.unit_ids.push_back(row[*id_col]);
    }
    return Dataset::create(std::move(draft));
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");
    const std::size_t p = d.n_covariates();
    const bool has_id = !d.unit_ids().empty();

    out << "treatment,outcome";
    for (const auto& name : d.covariate_names()) out << ',' << csv_quote(name);
    if (d.has_provided_ps()) out << ",ps";
    if (has_id) out << ",id";
    out << '\n';

    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t i = 0; i < d.n(); ++i) {
        out << d.treatment()[i] << ',';
        put(d.outcome()[i]);
        for (std::size_t j = 0; j < p; ++j) {
            out << ',';
            put(d.covariate_column(j)[i]);
        }
        if (d.has_provided_ps()) {
            out << ',';
            put(d.provided_ps()[i]);
        }
        if (has_id) out << ',' << csv_quote(d.unit_ids()[i]);
        out << '\n';
    }
}

}  // namespace psw
