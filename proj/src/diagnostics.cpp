#include "psw/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psw/bootstrap.hpp"
#include "psw/estimators.hpp"

namespace psw {

double ess(std::span<const double> w) {
    double sum = 0.0, sum_sq = 0.0;
    for (const double v : w) {
        sum += v;
        sum_sq += v * v;
    }
    if (!(sum_sq > 0.0)) throw EstimationError("all weights are zero");
    return sum * sum / sum_sq;
}

namespace {

double weighted_mean(std::span<const double> x, std::span<const int> a,
                     std::span<const double> w, int arm) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (a[i] == arm) {
            num += w[i] * x[i];
            den += w[i];
        }
    }
    if (!(den > 0.0)) throw EstimationError("degenerate weighted arm");
    return num / den;
}

// unweighted sample variance (n - 1 divisor)
double sample_variance(std::span<const double> x, std::span<const int> a,
                       int arm) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (a[i] == arm) {
            sum += x[i];
            ++n;
        }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (a[i] == arm) {
            const double dev = x[i] - mean;
            ss += dev * dev;
        }
    return ss / static_cast<double>(n - 1);
}

ArmQuartiles arm_quartiles(std::vector<double> values) {
    ArmQuartiles q;
    if (values.empty()) {
        q.min = q.q1 = q.median = q.q3 = q.max =
            std::numeric_limits<double>::quiet_NaN();
        return q;
    }
    std::sort(values.begin(), values.end());
    q.min = values.front();
    q.q1 = quantile_type7(values, 0.25);
    q.median = quantile_type7(values, 0.5);
    q.q3 = quantile_type7(values, 0.75);
    q.max = values.back();
    return q;
}

}  // namespace

double asmd(const Dataset& d, std::span<const double> w, std::size_t j) {
    const auto x = d.covariate_column(j);
    const auto& a = d.treatment();
    const double m1 = weighted_mean(x, a, w, 1);
    const double m0 = weighted_mean(x, a, w, 0);
    const double v1 = sample_variance(x, a, 1);
    const double v0 = sample_variance(x, a, 0);
    const double denom = std::sqrt((v1 + v0) / 2.0);
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(m1 - m0) / denom;
}

OverlapSummary overlap_summary(std::span<const double> ps,
                               std::span<const int> a,
                               std::span<const double> alphas, int n_bins) {
    OverlapSummary s;
    std::vector<double> ps1, ps0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        (a[i] ? ps1 : ps0).push_back(ps[i]);
    const std::size_t n1 = ps1.size();
    const std::size_t n0 = ps0.size();
    s.treated = arm_quartiles(ps1);
    s.control = arm_quartiles(ps0);

    s.alphas.assign(alphas.begin(), alphas.end());
    for (const double alpha : s.alphas) {
        std::size_t c1 = 0, c0 = 0;
        for (const double e : ps1)
            if (e < alpha || e > 1.0 - alpha) ++c1;
        for (const double e : ps0)
            if (e < alpha || e > 1.0 - alpha) ++c0;
        s.extreme_treated.push_back(
            n1 ? static_cast<double>(c1) / static_cast<double>(n1) : 0.0);
        s.extreme_control.push_back(
            n0 ? static_cast<double>(c0) / static_cast<double>(n0) : 0.0);
        s.extreme_overall.push_back(
            ps.empty() ? 0.0
                       : static_cast<double>(c1 + c0) /
                             static_cast<double>(ps.size()));
    }

    s.bin_edges.resize(n_bins + 1);
    for (int b = 0; b <= n_bins; ++b)
        s.bin_edges[b] = static_cast<double>(b) / n_bins;
    s.counts_treated.assign(n_bins, 0);
    s.counts_control.assign(n_bins, 0);
    auto bin_of = [&](double e) {
        int b = static_cast<int>(e * n_bins);
        return std::clamp(b, 0, n_bins - 1);
    };
    for (const double e : ps1) ++s.counts_treated[bin_of(e)];
    for (const double e : ps0) ++s.counts_control[bin_of(e)];
    return s;
}

BalanceReport balance_report(const Dataset& d, std::span<const double> ps,
                             const std::vector<WeightScheme>& schemes,
                             std::span<const double> alphas,
                             std::size_t clamped_count, PsSource source) {
    BalanceReport report;
    report.covariates = d.covariate_names();
    report.clamped_count = clamped_count;
    report.ps_source = source;
    report.n_treated = d.n_treated();
    report.n_controls = d.n_controls();

    const std::vector<double> unit(d.n(), 1.0);
    for (std::size_t j = 0; j < d.n_covariates(); ++j)
        report.asmd_unweighted.push_back(asmd(d, unit, j));

    for (const auto& scheme : schemes) {
        SchemeBalance row;
        row.label = scheme_label(scheme);
        row.scheme = scheme;
        const std::vector<double> w =
            unit_weights(scheme, ps, d.treatment());
        std::vector<double> w1, w0;
        for (std::size_t i = 0; i < w.size(); ++i)
            (d.treatment()[i] ? w1 : w0).push_back(w[i]);
        row.ess_treated = ess(w1);
        row.ess_control = ess(w0);
        row.ess_total = row.ess_treated + row.ess_control;
        for (std::size_t j = 0; j < d.n_covariates(); ++j)
            row.asmd.push_back(asmd(d, w, j));
        report.schemes.push_back(std::move(row));
    }

    report.overlap = overlap_summary(ps, d.treatment(), alphas);
    return report;
}

}  // namespace psw
