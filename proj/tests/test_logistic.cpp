#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "psw/dataset.hpp"
#include "psw/logistic.hpp"

using namespace psw;

namespace {

Dataset make_dataset(const std::vector<double>& a,
                     const std::vector<std::vector<double>>& cols) {
    DatasetDraft draft;
    draft.treatment = a;
    draft.outcome.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        draft.outcome[i] = static_cast<double>(i);
    for (std::size_t j = 0; j < cols.size(); ++j)
        draft.covariate_names.push_back("X" + std::to_string(j + 1));
    draft.covariates.resize(a.size() * cols.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            draft.covariates[i * cols.size() + j] = cols[j][i];
    return Dataset::create(std::move(draft));
}

// Independent oracle: plain dense Newton on the logistic log-likelihood
// with analytic gradient and Hessian, closed-form 2x2 solves, long double
// arithmetic, no step control.
std::array<long double, 2> newton_oracle(const std::vector<double>& x,
                                         const std::vector<double>& a) {
    long double b0 = 0.0L, b1 = 0.0L;
    for (int it = 0; it < 80; ++it) {
        long double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const long double eta = b0 + b1 * static_cast<long double>(x[i]);
            const long double p = 1.0L / (1.0L + std::exp(-eta));
            const long double r = static_cast<long double>(a[i]) - p;
            g0 += r;
            g1 += r * x[i];
            const long double w = p * (1.0L - p);
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        const long double det = h00 * h11 - h01 * h01;
        b0 += (h11 * g0 - h01 * g1) / det;
        b1 += (-h01 * g0 + h00 * g1) / det;
    }
    return {b0, b1};
}

}  // namespace

TEST_CASE("intercept-only fit recovers the Bernoulli mean") {
    const std::vector<double> a = {1, 0, 0, 1, 0, 1, 0, 0, 1, 0};  // mean 0.4
    const Dataset d = make_dataset(a, {});
    const PSFit fit = fit_logistic(d);
    CHECK(fit.converged);
    CHECK(fit.coefficients.size() == 1);
    CHECK(fit.coefficients[0] ==
          doctest::Approx(std::log(0.4 / 0.6)).epsilon(1e-10));
    for (const double e : fit.fitted_ps)
        CHECK(e == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("one-covariate fit matches an independent Newton oracle") {
    const std::vector<double> x = {-1.2, -0.8, -0.5, -0.1, 0.3,
                                   0.7,  1.1,  1.4,  1.8,  2.2};
    const std::vector<double> a = {0, 0, 1, 0, 0, 1, 1, 0, 1, 1};
    const Dataset d = make_dataset(a, {x});
    const PSFit fit = fit_logistic(d);
    REQUIRE(fit.converged);

    const auto truth = newton_oracle(x, a);
    CHECK(fit.coefficients[0] ==
          doctest::Approx(static_cast<double>(truth[0])).epsilon(1e-8));
    CHECK(fit.coefficients[1] ==
          doctest::Approx(static_cast<double>(truth[1])).epsilon(1e-8));
}

TEST_CASE("perfect separation is detected") {
    const std::vector<double> x = {-2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2};
    const std::vector<double> a = {0, 0, 0, 0, 1, 1, 1, 1};
    const Dataset d = make_dataset(a, {x});
    CHECK_THROWS_WITH_AS(fit_logistic(d), doctest::Contains("separation"),
                         FitError);
}

TEST_CASE("collinear designs are rejected") {
    const std::vector<double> x = {-1, 0, 1, 2, -2, 0.5, 1.5, -0.5};
    std::vector<double> x2 = x;
    for (double& v : x2) v = 2.0 * v;  // exact multiple of x
    const std::vector<double> a = {0, 1, 0, 1, 0, 1, 0, 1};
    const Dataset d = make_dataset(a, {x, x2});
    CHECK_THROWS_WITH_AS(fit_logistic(d),
                         doctest::Contains("collinear covariates"), FitError);
}

TEST_CASE("too few rows for the coefficient count") {
    const Dataset d = make_dataset({0, 1, 0}, {{1.0, 2.0, 3.0},
                                               {0.0, 1.0, 0.5}});
    CHECK_THROWS_AS(fit_logistic(d), FitError);
}

TEST_CASE("score equations hold at the fitted point") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = 200;
    std::vector<std::vector<double>> cols(3, std::vector<double>(n));
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& col : cols) col[i] = normal(gen);
        const double eta =
            -0.3 + 0.8 * cols[0][i] - 0.5 * cols[1][i] + 0.2 * cols[2][i];
        a[i] = unif(gen) < expit(eta) ? 1.0 : 0.0;
    }
    const Dataset d = make_dataset(a, cols);
    const PSFit fit = fit_logistic(d);
    REQUIRE(fit.converged);
    CHECK(fit.max_abs_score <= 1e-8);

    double sum0 = 0.0;
    std::vector<double> sums(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = a[i] - fit.fitted_ps[i];
        sum0 += resid;
        for (std::size_t j = 0; j < 3; ++j)
            sums[j] += resid * cols[j][i];
    }
    CHECK(std::abs(sum0) < 1e-6);
    for (const double s : sums) CHECK(std::abs(s) < 1e-6);
}

TEST_CASE("log-likelihood is monotone across IRLS iterations") {
    std::mt19937_64 gen(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = 120;
    std::vector<double> x(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = normal(gen);
        a[i] = unif(gen) < expit(2.5 * x[i] - 0.7) ? 1.0 : 0.0;
    }
    const Dataset d = make_dataset(a, {x});
    const PSFit fit = fit_logistic(d);
    for (std::size_t k = 1; k < fit.loglik_path.size(); ++k)
        CHECK(fit.loglik_path[k] >= fit.loglik_path[k - 1] - 1e-12);
}

TEST_CASE("fitted PS is invariant to affine covariate rescaling") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = 150;
    std::vector<std::vector<double>> cols(2, std::vector<double>(n));
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        cols[0][i] = normal(gen);
        cols[1][i] = normal(gen) * 0.5 + 1.0;
        a[i] = unif(gen) < expit(0.9 * cols[0][i] - 0.6 * cols[1][i]) ? 1.0
                                                                      : 0.0;
    }
    const PSFit base = fit_logistic(make_dataset(a, cols));

    auto rescaled = cols;
    for (double& v : rescaled[1]) v = 1000.0 * v - 37.0;
    const PSFit scaled = fit_logistic(make_dataset(a, rescaled));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(base.fitted_ps[i] ==
              doctest::Approx(scaled.fitted_ps[i]).epsilon(1e-8));
}

TEST_CASE("extreme fitted values are clamped and counted") {
    const std::vector<double> x = {-1, -1, -1, 1, 1, 1, -50};
    const std::vector<double> a = {0, 0, 1, 1, 1, 0, 0};
    const Dataset d = make_dataset(a, {x});
    const PSFit fit = fit_logistic(d);
    REQUIRE(fit.converged);
    CHECK(fit.clamped_count == 1);
    for (const double e : fit.fitted_ps) {
        CHECK(e >= 1e-6);
        CHECK(e <= 1.0 - 1e-6);
    }
    CHECK(fit.fitted_ps[6] == 1e-6);
}

TEST_CASE("resolve_ps requires exactly one source") {
    DatasetDraft draft;
    draft.treatment = {0, 1, 0, 1};
    draft.outcome = {1, 2, 3, 4};
    draft.provided_ps = std::vector<double>{0.2, 0.4, 0.6, 0.8};
    const Dataset with_ps = Dataset::create(std::move(draft));

    const auto resolved = resolve_ps(with_ps, nullptr);
    CHECK(resolved.source == PsSource::provided);
    CHECK(resolved.ps == std::vector<double>{0.2, 0.4, 0.6, 0.8});

    PSFit fake;
    fake.fitted_ps = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_WITH_AS(resolve_ps(with_ps, &fake),
                         doctest::Contains("ambiguous PS source"), FitError);

    DatasetDraft no_ps;
    no_ps.treatment = {0, 1};
    no_ps.outcome = {1, 2};
    const Dataset bare = Dataset::create(std::move(no_ps));
    CHECK_THROWS_WITH_AS(resolve_ps(bare, nullptr),
                         doctest::Contains("no PS source"), FitError);

    const auto from_fit = resolve_ps(bare, &fake);
    CHECK(from_fit.source == PsSource::fitted);
    CHECK(from_fit.ps == fake.fitted_ps);
}
