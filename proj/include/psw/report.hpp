#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psw/bootstrap.hpp"
#include "psw/diagnostics.hpp"
#include "psw/estimators.hpp"
#include "psw/simulation.hpp"

namespace psw {

/// One output row of an analysis table (point estimate plus optional
/// bootstrap inference), in the reference column order
/// Est, Std.Err, Upr, Lwr.
struct ResultRow {
    std::string label;
    std::string scheme_token;
    Measure measure = Measure::rd;
    std::optional<double> est;
    std::optional<double> std_err;
    std::optional<double> upr;
    std::optional<double> lwr;
    std::string error;
};

struct ResultTable {
    EstimandClass estimand_class = EstimandClass::wate;
    std::vector<ResultRow> rows;
};

/// Run metadata attached to analysis outputs.
struct AnalysisMeta {
    std::string input;
    std::size_t n = 0;
    std::size_t n_treated = 0;
    std::string ps_source;          // "fitted" or "provided"
    std::size_t ps_clamped = 0;
    bool ps_converged = true;
    bool boot = false;
    int n_boot = 0;
    std::uint64_t seed = 0;
    double alpha_level = 0.05;
    std::string ci_method;
    int threads = 0;
    // set when provided PS is reused inside bootstrap replicates
    bool ps_uncertainty_in_bootstrap = true;
    std::string note;
};

/// CSV serialization with 6 significant digits; header
/// class,measure,label,scheme,Est,Std.Err,Upr,Lwr,error.
std::string result_table_csv(const ResultTable& table);
/// Full-precision JSON (rows plus metadata).
std::string result_table_json(const ResultTable& table,
                              const AnalysisMeta& meta);
/// Aligned plain-text rendering for the console.
std::string result_table_text(const ResultTable& table);

std::string format_sig6(double v);

/// Balance report serializations (long-format CSVs plus one JSON).
std::string balance_ess_csv(const BalanceReport& report);
std::string balance_asmd_csv(const BalanceReport& report,
                             EstimandClass cls);
std::string overlap_summary_csv(const OverlapSummary& overlap);
std::string overlap_hist_csv(const OverlapSummary& overlap);
std::string balance_report_json(const BalanceReport& report,
                                EstimandClass cls);

/// Simulation outputs: long summary CSV (scheme,label,metric,value),
/// replicate-level CSV, and a complete JSON document.
std::string sim_summary_csv(const SimResult& result);
std::string sim_replicates_csv(const SimResult& result);
std::string sim_result_json(const SimResult& result);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace psw
