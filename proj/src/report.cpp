#include "psw/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psw/csv.hpp"

namespace psw {

using nlohmann::json;

namespace {

json num_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json opt_or_null(const std::optional<double>& v) {
    if (v && std::isfinite(*v)) return *v;
    return nullptr;
}

std::string field_sig6(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return "";
    return format_sig6(*v);
}

}  // namespace

std::string format_sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string result_table_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "class,measure,label,scheme,Est,Std.Err,Upr,Lwr,error\n";
    for (const auto& row : table.rows) {
        os << to_string(table.estimand_class) << ',' << to_string(row.measure)
           << ',' << csv_quote(row.label) << ',' << row.scheme_token << ','
           << field_sig6(row.est) << ',' << field_sig6(row.std_err) << ','
           << field_sig6(row.upr) << ',' << field_sig6(row.lwr) << ','
           << csv_quote(row.error) << '\n';
    }
    return os.str();
}

std::string result_table_json(const ResultTable& table,
                              const AnalysisMeta& meta) {
    json doc;
    doc["class"] = to_string(table.estimand_class);
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r;
        r["label"] = row.label;
        r["scheme"] = row.scheme_token;
        r["measure"] = to_string(row.measure);
        r["est"] = opt_or_null(row.est);
        r["std_err"] = opt_or_null(row.std_err);
        r["upr"] = opt_or_null(row.upr);
        r["lwr"] = opt_or_null(row.lwr);
        if (!row.error.empty()) r["error"] = row.error;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    json m;
    m["input"] = meta.input;
    m["n"] = meta.n;
    m["n_treated"] = meta.n_treated;
    m["ps_source"] = meta.ps_source;
    m["ps_clamped"] = meta.ps_clamped;
    m["ps_converged"] = meta.ps_converged;
    m["boot"] = meta.boot;
    if (meta.boot) {
        m["n_boot"] = meta.n_boot;
        m["seed"] = meta.seed;
        m["alpha_level"] = meta.alpha_level;
        m["ci_method"] = meta.ci_method;
        m["ps_uncertainty_in_bootstrap"] = meta.ps_uncertainty_in_bootstrap;
    }
    m["threads"] = meta.threads;
    if (!meta.note.empty()) m["note"] = meta.note;
    doc["meta"] = std::move(m);
    return doc.dump(2) + "\n";
}

std::string result_table_text(const ResultTable& table) {
    std::size_t label_width = 8;
    for (const auto& row : table.rows)
        label_width = std::max(label_width, row.label.size());

    std::ostringstream os;
    char buf[64];
    auto cell = [&](const std::optional<double>& v) {
        if (!v || !std::isfinite(*v)) return std::string(10, ' ');
        std::snprintf(buf, sizeof buf, "%10.6f", *v);
        return std::string(buf);
    };
    os << std::string(label_width, ' ') << "         Est    Std.Err"
       << "        Upr        Lwr\n";
    for (const auto& row : table.rows) {
        os << row.label << std::string(label_width - row.label.size(), ' ');
        os << ' ' << cell(row.est) << ' ' << cell(row.std_err) << ' '
           << cell(row.upr) << ' ' << cell(row.lwr);
        if (!row.error.empty()) os << "  [" << row.error << ']';
        os << '\n';
    }
    return os.str();
}

std::string balance_ess_csv(const BalanceReport& report) {
    std::ostringstream os;
    os << "scheme,label,ess_treated,ess_control,ess_total,n_treated,"
          "n_control\n";
    for (const auto& s : report.schemes) {
        os << scheme_token(s.scheme) << ',' << csv_quote(s.label) << ','
           << format_sig6(s.ess_treated) << ',' << format_sig6(s.ess_control)
           << ',' << format_sig6(s.ess_total) << ',' << report.n_treated
           << ',' << report.n_controls << '\n';
    }
    return os.str();
}

std::string balance_asmd_csv(const BalanceReport& report, EstimandClass cls) {
    std::ostringstream os;
    os << "covariate,class,scheme,label,asmd,asmd_unweighted\n";
    for (std::size_t j = 0; j < report.covariates.size(); ++j) {
        for (const auto& s : report.schemes) {
            os << csv_quote(report.covariates[j]) << ',' << to_string(cls)
               << ',' << scheme_token(s.scheme) << ',' << csv_quote(s.label)
               << ',';
            if (std::isfinite(s.asmd[j])) os << format_sig6(s.asmd[j]);
            os << ',';
            if (std::isfinite(report.asmd_unweighted[j]))
                os << format_sig6(report.asmd_unweighted[j]);
            os << '\n';
        }
    }
    return os.str();
}

std::string overlap_summary_csv(const OverlapSummary& overlap) {
    std::ostringstream os;
    os << "arm,min,q1,median,q3,max";
    for (const double a : overlap.alphas) os << ",extreme_" << a;
    os << '\n';
    auto row = [&](const char* arm, const ArmQuartiles& q,
                   const std::vector<double>& extreme) {
        os << arm << ',' << format_sig6(q.min) << ',' << format_sig6(q.q1)
           << ',' << format_sig6(q.median) << ',' << format_sig6(q.q3) << ','
           << format_sig6(q.max);
        for (const double f : extreme) os << ',' << format_sig6(f);
        os << '\n';
    };
    row("treated", overlap.treated, overlap.extreme_treated);
    row("control", overlap.control, overlap.extreme_control);
    return os.str();
}

std::string overlap_hist_csv(const OverlapSummary& overlap) {
    std::ostringstream os;
    os << "arm,bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b + 1 < overlap.bin_edges.size(); ++b)
        os << "treated," << format_sig6(overlap.bin_edges[b]) << ','
           << format_sig6(overlap.bin_edges[b + 1]) << ','
           << overlap.counts_treated[b] << '\n';
    for (std::size_t b = 0; b + 1 < overlap.bin_edges.size(); ++b)
        os << "control," << format_sig6(overlap.bin_edges[b]) << ','
           << format_sig6(overlap.bin_edges[b + 1]) << ','
           << overlap.counts_control[b] << '\n';
    return os.str();
}

namespace {

json quartiles_json(const ArmQuartiles& q) {
    json j;
    j["min"] = num_or_null(q.min);
    j["q1"] = num_or_null(q.q1);
    j["median"] = num_or_null(q.median);
    j["q3"] = num_or_null(q.q3);
    j["max"] = num_or_null(q.max);
    return j;
}

}  // namespace

std::string balance_report_json(const BalanceReport& report,
                                EstimandClass cls) {
    json doc;
    doc["class"] = to_string(cls);
    doc["covariates"] = report.covariates;
    json unweighted = json::array();
    for (const double v : report.asmd_unweighted)
        unweighted.push_back(num_or_null(v));
    doc["asmd_unweighted"] = std::move(unweighted);
    doc["n_treated"] = report.n_treated;
    doc["n_control"] = report.n_controls;
    doc["ps_source"] =
        report.ps_source == PsSource::provided ? "provided" : "fitted";
    doc["ps_clamped"] = report.clamped_count;

    json schemes = json::array();
    for (const auto& s : report.schemes) {
        json row;
        row["scheme"] = scheme_token(s.scheme);
        row["label"] = s.label;
        row["ess_treated"] = s.ess_treated;
        row["ess_control"] = s.ess_control;
        row["ess_total"] = s.ess_total;
        json asmds = json::array();
        for (const double v : s.asmd) asmds.push_back(num_or_null(v));
        row["asmd"] = std::move(asmds);
        schemes.push_back(std::move(row));
    }
    doc["schemes"] = std::move(schemes);

    json overlap;
    overlap["treated"] = quartiles_json(report.overlap.treated);
    overlap["control"] = quartiles_json(report.overlap.control);
    overlap["alphas"] = report.overlap.alphas;
    overlap["extreme_treated"] = report.overlap.extreme_treated;
    overlap["extreme_control"] = report.overlap.extreme_control;
    overlap["extreme_overall"] = report.overlap.extreme_overall;
    overlap["bin_edges"] = report.overlap.bin_edges;
    overlap["counts_treated"] = report.overlap.counts_treated;
    overlap["counts_control"] = report.overlap.counts_control;
    doc["overlap"] = std::move(overlap);
    return doc.dump(2) + "\n";
}

std::string sim_summary_csv(const SimResult& result) {
    std::ostringstream os;
    os << "scheme,label,metric,value\n";
    auto put = [&](const WeightScheme& scheme, const std::string& label,
                   const char* metric, double value) {
        os << scheme_token(scheme) << ',' << csv_quote(label) << ',' << metric
           << ',';
        if (std::isfinite(value)) os << format_sig6(value);
        os << '\n';
    };
    for (const auto& s : result.schemes) {
        put(s.scheme, s.label, "truth", s.truth);
        put(s.scheme, s.label, "truth_se", s.truth_se);
        put(s.scheme, s.label, "rbias_median", s.summary.rbias_median);
        put(s.scheme, s.label, "rbias_q1", s.summary.rbias_q1);
        put(s.scheme, s.label, "rbias_q3", s.summary.rbias_q3);
        put(s.scheme, s.label, "coverage", s.summary.coverage);
        put(s.scheme, s.label, "mean_ci_width", s.summary.mean_ci_width);
        put(s.scheme, s.label, "n_failed",
            static_cast<double>(s.summary.n_failed));
        put(s.scheme, s.label, "cp_band_lo", result.cp_band_lo);
        put(s.scheme, s.label, "cp_band_hi", result.cp_band_hi);
    }
    return os.str();
}

std::string sim_replicates_csv(const SimResult& result) {
    std::ostringstream os;
    os << "scheme,label,replicate,estimate,rbias_pct,ci_lower,ci_upper,"
          "covered\n";
    for (const auto& s : result.schemes) {
        for (std::size_t r = 0; r < s.estimates.size(); ++r) {
            os << scheme_token(s.scheme) << ',' << csv_quote(s.label) << ','
               << r << ',';
            if (std::isfinite(s.estimates[r]))
                os << format_sig6(s.estimates[r]);
            os << ',';
            if (std::isfinite(s.rbias_pct[r]))
                os << format_sig6(s.rbias_pct[r]);
            os << ',';
            if (std::isfinite(s.ci_lower[r]))
                os << format_sig6(s.ci_lower[r]);
            os << ',';
            if (std::isfinite(s.ci_upper[r]))
                os << format_sig6(s.ci_upper[r]);
            os << ',';
            if (std::isfinite(s.ci_lower[r]) && std::isfinite(s.ci_upper[r]))
                os << (s.ci_lower[r] <= s.truth && s.truth <= s.ci_upper[r]
                           ? 1
                           : 0);
            os << '\n';
        }
    }
    return os.str();
}

std::string sim_result_json(const SimResult& result) {
    json doc;
    doc["gamma"] = result.config.gamma;
    doc["alpha0"] = result.config.alpha0;
    doc["ps_model"] = result.config.ps_spec == PsModelSpec::correct
                          ? "correct"
                          : "misspecified";
    doc["overlap"] = result.overlap;
    doc["m"] = result.opts.m;
    doc["n"] = result.opts.n;
    doc["n_boot"] = result.opts.n_boot;
    doc["seed"] = result.opts.seed;
    doc["truth_seed"] = result.opts.truth_seed;
    doc["super_n"] = result.opts.super_n;
    doc["alpha_level"] = result.opts.alpha_level;
    doc["ci_method"] = to_string(result.opts.ci_method);
    doc["cp_band"] = {num_or_null(result.cp_band_lo),
                      num_or_null(result.cp_band_hi)};
    doc["realized_treated_frac"] = result.realized_treated_frac;

    json schemes = json::array();
    for (const auto& s : result.schemes) {
        json row;
        row["scheme"] = scheme_token(s.scheme);
        row["label"] = s.label;
        row["truth"] = s.truth;
        row["truth_se"] = num_or_null(s.truth_se);
        row["rbias_median"] = num_or_null(s.summary.rbias_median);
        row["rbias_q1"] = num_or_null(s.summary.rbias_q1);
        row["rbias_q3"] = num_or_null(s.summary.rbias_q3);
        row["coverage"] = num_or_null(s.summary.coverage);
        row["mean_ci_width"] = num_or_null(s.summary.mean_ci_width);
        row["n_failed"] = s.summary.n_failed;
        json est = json::array();
        for (const double v : s.estimates) est.push_back(num_or_null(v));
        row["estimates"] = std::move(est);
        schemes.push_back(std::move(row));
    }
    doc["schemes"] = std::move(schemes);
    return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << content;
}

}  // namespace psw
