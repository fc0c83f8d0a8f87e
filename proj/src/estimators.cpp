#include "psw/estimators.hpp"

#include <cmath>

namespace psw {

std::string to_string(Measure m) {
    switch (m) {
        case Measure::rd:
            return "rd";
        case Measure::rr:
            return "rr";
        case Measure::odds_ratio:
            return "or";
    }
    throw std::invalid_argument("unknown measure");
}

Measure parse_measure(std::string_view text) {
    if (text == "rd") return Measure::rd;
    if (text == "rr") return Measure::rr;
    if (text == "or") return Measure::odds_ratio;
    throw std::invalid_argument("unknown measure '" + std::string(text) +
                                "'");
}

ArmMeans weighted_arm_means(std::span<const double> y,
                            std::span<const int> a,
                            std::span<const double> w) {
    if (y.size() != a.size() || y.size() != w.size())
        throw EstimationError("outcome/treatment/weight lengths differ");

    double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
    std::size_t zero1 = 0, zero0 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (a[i]) {
            num1 += w[i] * y[i];
            den1 += w[i];
            if (w[i] == 0.0) ++zero1;
        } else {
            num0 += w[i] * y[i];
            den0 += w[i];
            if (w[i] == 0.0) ++zero0;
        }
    }
    if (!(den1 > 0.0) || !(den0 > 0.0) || !std::isfinite(den1) ||
        !std::isfinite(den0))
        throw EstimationError("degenerate weighted arm");

    ArmMeans m;
    m.treated_mean = num1 / den1;
    m.control_mean = num0 / den0;
    m.sum_weight_treated = den1;
    m.sum_weight_control = den0;
    m.zero_weight_treated = zero1;
    m.zero_weight_control = zero0;
    return m;
}

double combine_measure(Measure m, double p1, double p0) {
    switch (m) {
        case Measure::rd:
            return p1 - p0;
        case Measure::rr:
            if (p0 == 0.0) throw EstimationError("undefined ratio measure");
            return p1 / p0;
        case Measure::odds_ratio:
            if (p0 <= 0.0 || p0 >= 1.0 || p1 <= 0.0 || p1 >= 1.0)
                throw EstimationError("undefined ratio measure");
            return (p1 / p0) * ((1.0 - p0) / (1.0 - p1));
    }
    throw EstimationError("unknown measure");
}

PointResult estimate_point_raw(std::span<const double> y,
                               std::span<const int> a,
                               std::span<const double> ps,
                               const EstimandSpec& spec) {
    const std::vector<double> w = unit_weights(spec.scheme, ps, a);
    const ArmMeans m = weighted_arm_means(y, a, w);

    PointResult r;
    r.treated_mean = m.treated_mean;
    r.control_mean = m.control_mean;
    r.sum_weight_treated = m.sum_weight_treated;
    r.sum_weight_control = m.sum_weight_control;
    r.zero_weight_treated = m.zero_weight_treated;
    r.zero_weight_control = m.zero_weight_control;
    r.estimate = combine_measure(spec.measure, m.treated_mean, m.control_mean);
    return r;
}

PointResult estimate_point(const Dataset& d, std::span<const double> ps,
                           const EstimandSpec& spec) {
    if (ps.size() != d.n())
        throw EstimationError("ps length does not match dataset");
    if (spec.measure != Measure::rd &&
        d.outcome_kind() != OutcomeKind::binary)
        throw EstimationError(
            "ratio measures require a binary outcome");
    return estimate_point_raw(d.outcome(), d.treatment(), ps, spec);
}

std::vector<WeightScheme> scheme_catalog(EstimandClass cls,
                                         const CatalogRequest& req) {
    std::vector<WeightScheme> out;
    out.push_back(WeightScheme::make(cls, Scheme::ipw));
    if (cls == EstimandClass::wate) {
        out.push_back(WeightScheme::make(cls, Scheme::ipw_treated));
        out.push_back(WeightScheme::make(cls, Scheme::ipw_controls));
    }
    out.push_back(WeightScheme::make(cls, Scheme::ow));
    out.push_back(WeightScheme::make(cls, Scheme::mw));
    out.push_back(WeightScheme::make(cls, Scheme::ew));
    for (const double nu : req.beta_nus) {
        SchemeParams p;
        p.nu1 = nu;
        p.nu2 = nu;
        out.push_back(WeightScheme::make(cls, Scheme::bw, p));
    }
    for (const double alpha : req.trim_alphas) {
        SchemeParams p;
        p.alpha = alpha;
        out.push_back(WeightScheme::make(cls, Scheme::trim, p));
    }
    for (const double alpha : req.trunc_alphas) {
        SchemeParams p;
        p.alpha = alpha;
        out.push_back(WeightScheme::make(cls, Scheme::trunc, p));
    }
    for (const double alpha : req.smooth_trim_alphas) {
        SchemeParams p;
        p.alpha = alpha;
        p.epsilon = req.smooth_trim_epsilon;
        out.push_back(WeightScheme::make(cls, Scheme::smooth_trim, p));
    }
    if (cls == EstimandClass::wate) {
        for (const double k : req.tw_ks) {
            SchemeParams p;
            p.K = k;
            out.push_back(WeightScheme::make(cls, Scheme::tw, p));
        }
    }
    return out;
}

std::vector<EstimateRow> estimate_all(const Dataset& d,
                                      std::span<const double> ps,
                                      const std::vector<EstimandSpec>& specs) {
    std::vector<EstimateRow> rows;
    rows.reserve(specs.size());
    for (const auto& spec : specs) {
        EstimateRow row;
        row.label = scheme_label(spec.scheme);
        row.scheme = spec.scheme;
        row.measure = spec.measure;
        try {
            row.result = estimate_point(d, ps, spec);
        } catch (const EstimationError& err) {
            row.error = err.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace psw
