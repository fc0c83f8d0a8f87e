#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "psw/dataset.hpp"
#include "psw/estimators.hpp"
#include "psw/logistic.hpp"
#include "psw/tilting.hpp"

using namespace psw;

namespace {

Dataset make_dataset(const std::vector<double>& a,
                     const std::vector<double>& y,
                     OutcomeKind kind = OutcomeKind::continuous) {
    DatasetDraft draft;
    draft.treatment = a;
    draft.outcome = y;
    draft.outcome_kind = kind;
    return Dataset::create(std::move(draft));
}

WeightScheme scheme(EstimandClass cls, Scheme s, SchemeParams p = {}) {
    return WeightScheme::make(cls, s, p);
}

SchemeParams alpha_p(double a) {
    SchemeParams p;
    p.alpha = a;
    return p;
}

}  // namespace

TEST_CASE("constant PS reduces the wate ipw estimate to a difference of "
          "raw means") {
    const std::vector<double> a = {1, 0, 1, 0, 1, 0, 0, 1};
    const std::vector<double> y = {3.0, 1.0, 5.0, 2.5, 4.0, 0.5, 1.5, 6.0};
    const Dataset d = make_dataset(a, y);
    const std::vector<double> ps(8, 0.5);

    double m1 = 0, m0 = 0;
    int n1 = 0, n0 = 0;
    for (int i = 0; i < 8; ++i) {
        if (a[i] == 1.0) {
            m1 += y[i];
            ++n1;
        } else {
            m0 += y[i];
            ++n0;
        }
    }
    const double raw_diff = m1 / n1 - m0 / n0;

    const EstimandSpec spec{scheme(EstimandClass::wate, Scheme::ipw),
                            Measure::rd};
    const PointResult r = estimate_point(d, ps, spec);
    CHECK(r.estimate == doctest::Approx(raw_diff).epsilon(1e-14));
}

TEST_CASE("8-unit wate overlap estimate matches a brute-force oracle") {
    const std::vector<double> a = {1, 0, 1, 0, 1, 0, 0, 1};
    const std::vector<double> y = {3.0, 1.0, 5.0, 2.5, 4.0, 0.5, 1.5, 6.0};
    const std::vector<double> e = {0.8, 0.3, 0.55, 0.2,
                                   0.7, 0.45, 0.6, 0.35};
    const Dataset d = make_dataset(a, y);

    // oracle: literal sums of h/e and h/(1-e) terms with h = e(1-e)
    double num1 = 0, den1 = 0, num0 = 0, den0 = 0;
    for (int i = 0; i < 8; ++i) {
        const double h = e[i] * (1.0 - e[i]);
        if (a[i] == 1.0) {
            num1 += h / e[i] * y[i];
            den1 += h / e[i];
        } else {
            num0 += h / (1.0 - e[i]) * y[i];
            den0 += h / (1.0 - e[i]);
        }
    }
    const double expected = num1 / den1 - num0 / den0;

    const EstimandSpec spec{scheme(EstimandClass::wate, Scheme::ow),
                            Measure::rd};
    const PointResult r = estimate_point(d, e, spec);
    CHECK(r.estimate == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.sum_weight_treated == doctest::Approx(den1).epsilon(1e-12));
    CHECK(r.sum_weight_control == doctest::Approx(den0).epsilon(1e-12));
}

TEST_CASE("null binary effect gives unit ratio measures") {
    // both arms share proportion 0.3 under unit weights
    const std::vector<double> a = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                                   0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    std::vector<double> y(20, 0.0);
    y[0] = y[1] = y[2] = 1.0;    // 3/10 treated
    y[10] = y[11] = y[12] = 1.0;  // 3/10 control
    const Dataset d = make_dataset(a, y, OutcomeKind::binary);
    const std::vector<double> ps(20, 0.5);

    const auto base = scheme(EstimandClass::wate, Scheme::ipw);
    CHECK(estimate_point(d, ps, {base, Measure::rr}).estimate ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(estimate_point(d, ps, {base, Measure::odds_ratio}).estimate ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(estimate_point(d, ps, {base, Measure::rd}).estimate ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("odds ratio equals rr * (1-p0)/(1-p1) exactly") {
    const std::vector<double> a = {1, 1, 1, 1, 0, 0, 0, 0, 0, 1};
    const std::vector<double> y = {1, 0, 1, 1, 0, 1, 0, 0, 1, 0};
    const std::vector<double> e = {0.6, 0.7, 0.55, 0.55, 0.3,
                                   0.4, 0.35, 0.25, 0.45, 0.65};
    const Dataset d = make_dataset(a, y, OutcomeKind::binary);

    for (const auto cls :
         {EstimandClass::wate, EstimandClass::watt, EstimandClass::watc}) {
        const auto sch = scheme(cls, Scheme::ow);
        const auto rd = estimate_point(d, e, {sch, Measure::rd});
        const auto rr = estimate_point(d, e, {sch, Measure::rr});
        const auto orr = estimate_point(d, e, {sch, Measure::odds_ratio});
        const double p1 = rd.treated_mean;
        const double p0 = rd.control_mean;
        CHECK(orr.estimate ==
              rr.estimate * ((1.0 - p0) / (1.0 - p1)));  // same doubles
        CHECK(rr.treated_mean == rd.treated_mean);
        CHECK(rr.control_mean == rd.control_mean);
        CHECK(p1 >= 0.0);
        CHECK(p1 <= 1.0);
    }
}

TEST_CASE("point estimates are invariant to tilting scale") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 40;
    std::vector<double> y(n), e(n);
    std::vector<int> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = unif(gen);
        a[i] = i % 2 == 0 ? 1 : 0;
        y[i] = normal(gen) + 2.0 * a[i];
    }

    const auto sch = scheme(EstimandClass::wate, Scheme::ew);
    std::vector<double> w = unit_weights(sch, e, a);
    const ArmMeans base = weighted_arm_means(y, a, w);
    for (const double c : {1e-7, 0.5, 3.0, 1e8}) {
        std::vector<double> scaled = w;
        for (double& v : scaled) v *= c;
        const ArmMeans m = weighted_arm_means(y, a, scaled);
        CHECK(m.treated_mean ==
              doctest::Approx(base.treated_mean).epsilon(1e-12));
        CHECK(m.control_mean ==
              doctest::Approx(base.control_mean).epsilon(1e-12));
    }
}

TEST_CASE("wate treated/controls coincide with watt/watc under g = 1") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 60;
    std::vector<double> a(n), y(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = i % 3 == 0 ? 1.0 : 0.0;
        y[i] = normal(gen) + a[i];
        e[i] = unif(gen);
    }
    const Dataset d = make_dataset(a, y);

    const auto att_via_wate = estimate_point(
        d, e, {scheme(EstimandClass::wate, Scheme::ipw_treated), Measure::rd});
    const auto att_via_watt = estimate_point(
        d, e, {scheme(EstimandClass::watt, Scheme::ipw), Measure::rd});
    CHECK(att_via_wate.estimate ==
          doctest::Approx(att_via_watt.estimate).epsilon(1e-12));

    const auto atc_via_wate = estimate_point(
        d, e,
        {scheme(EstimandClass::wate, Scheme::ipw_controls), Measure::rd});
    const auto atc_via_watc = estimate_point(
        d, e, {scheme(EstimandClass::watc, Scheme::ipw), Measure::rd});
    CHECK(atc_via_wate.estimate ==
          doctest::Approx(atc_via_watc.estimate).epsilon(1e-12));
}

TEST_CASE("trimming equals subsetting to the retained PS range") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 80;
    std::vector<double> a(n), y(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = i % 2 ? 1.0 : 0.0;
        y[i] = normal(gen);
        e[i] = unif(gen);
    }
    const double alpha = 0.1;
    const Dataset full = make_dataset(a, y);
    const auto trim_est = estimate_point(
        full, e,
        {scheme(EstimandClass::wate, Scheme::trim, alpha_p(alpha)),
         Measure::rd});

    std::vector<double> a_sub, y_sub, e_sub;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha < e[i] && e[i] < 1.0 - alpha) {
            a_sub.push_back(a[i]);
            y_sub.push_back(y[i]);
            e_sub.push_back(e[i]);
        }
    }
    REQUIRE(a_sub.size() < n);  // something was actually trimmed
    const Dataset subset = make_dataset(a_sub, y_sub);
    const auto subset_est = estimate_point(
        subset, e_sub,
        {scheme(EstimandClass::wate, Scheme::ipw), Measure::rd});
    CHECK(trim_est.estimate ==
          doctest::Approx(subset_est.estimate).epsilon(1e-12));
}

TEST_CASE("overlap weights balance fitted covariate means exactly") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = 300;
    DatasetDraft draft;
    draft.covariate_names = {"X1", "X2", "X3"};
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = normal(gen);
        const double x2 = normal(gen) * 0.7;
        const double x3 = unif(gen) < 0.4 ? 1.0 : 0.0;
        const double eta = -0.2 + 0.9 * x1 - 0.7 * x2 + 0.5 * x3;
        draft.treatment.push_back(unif(gen) < expit(eta) ? 1.0 : 0.0);
        draft.outcome.push_back(normal(gen));
        draft.covariates.insert(draft.covariates.end(), {x1, x2, x3});
    }
    const Dataset d = Dataset::create(std::move(draft));
    const PSFit fit = fit_logistic(d);
    REQUIRE(fit.converged);

    const auto ow = scheme(EstimandClass::wate, Scheme::ow);
    const std::vector<double> w =
        unit_weights(ow, fit.fitted_ps, d.treatment());
    for (std::size_t j = 0; j < 3; ++j) {
        double n1 = 0, d1 = 0, n0 = 0, d0 = 0;
        const auto col = d.covariate_column(j);
        for (std::size_t i = 0; i < n; ++i) {
            if (d.treatment()[i]) {
                n1 += w[i] * col[i];
                d1 += w[i];
            } else {
                n0 += w[i] * col[i];
                d0 += w[i];
            }
        }
        CHECK(std::abs(n1 / d1 - n0 / d0) < 1e-6);
    }
}

TEST_CASE("degenerate arms and undefined ratios raise errors") {
    const std::vector<double> a = {1, 1, 0, 0};
    const std::vector<double> y = {1, 0, 0, 0};
    const Dataset d = make_dataset(a, y, OutcomeKind::binary);

    // trimming removes every treated unit
    const std::vector<double> e = {0.97, 0.98, 0.5, 0.5};
    CHECK_THROWS_WITH_AS(
        estimate_point(d, e,
                       {scheme(EstimandClass::wate, Scheme::trim,
                               alpha_p(0.05)),
                        Measure::rd}),
        doctest::Contains("degenerate weighted arm"), EstimationError);

    // control proportion is zero
    const std::vector<double> mid(4, 0.5);
    CHECK_THROWS_WITH_AS(
        estimate_point(d, mid,
                       {scheme(EstimandClass::wate, Scheme::ipw),
                        Measure::rr}),
        doctest::Contains("undefined ratio measure"), EstimationError);

    // ratio measures need a binary outcome
    const Dataset cont = make_dataset(a, y, OutcomeKind::continuous);
    CHECK_THROWS_AS(
        estimate_point(cont, mid,
                       {scheme(EstimandClass::wate, Scheme::ipw),
                        Measure::rr}),
        EstimationError);
}

TEST_CASE("catalog layout matches the reference row sets") {
    CatalogRequest req;
    const auto base = scheme_catalog(EstimandClass::wate, req);
    std::vector<std::string> labels;
    for (const auto& s : base) labels.push_back(scheme_label(s));
    CHECK(labels == std::vector<std::string>{"overall", "treated", "control",
                                             "overlap", "matching",
                                             "entropy"});

    req.beta_nus = {2, 4};
    req.trim_alphas = {0.05, 0.1};
    req.trunc_alphas = {0.05, 0.1};
    const auto full = scheme_catalog(EstimandClass::wate, req);
    labels.clear();
    for (const auto& s : full) labels.push_back(scheme_label(s));
    CHECK(labels ==
          std::vector<std::string>{
              "overall", "treated", "control", "overlap", "matching",
              "entropy", "beta (v=2)", "beta (v=4)", "trimming (alpha=0.05)",
              "trimming (alpha=0.1)", "truncation (alpha=0.05)",
              "truncation (alpha=0.1)"});

    const auto watt_rows = scheme_catalog(EstimandClass::watt, {});
    labels.clear();
    for (const auto& s : watt_rows) labels.push_back(scheme_label(s));
    CHECK(labels == std::vector<std::string>{"overall", "overlap", "matching",
                                             "entropy"});
}

TEST_CASE("estimate_all records row-level failures without aborting") {
    const std::vector<double> a = {1, 1, 0, 0, 1, 0};
    const std::vector<double> y = {1.0, 2.0, 0.5, 1.5, 2.5, 1.0};
    const std::vector<double> e = {0.97, 0.98, 0.4, 0.5, 0.96, 0.45};
    const Dataset d = make_dataset(a, y);

    std::vector<EstimandSpec> specs = {
        {scheme(EstimandClass::wate, Scheme::ipw), Measure::rd},
        {scheme(EstimandClass::wate, Scheme::trim, alpha_p(0.05)),
         Measure::rd},
    };
    const auto rows = estimate_all(d, e, specs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].result.has_value());
    CHECK(rows[0].error.empty());
    CHECK_FALSE(rows[1].result.has_value());
    CHECK(rows[1].error == "degenerate weighted arm");
    CHECK(rows[1].label == "trimming (alpha=0.05)");
}
