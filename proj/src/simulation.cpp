#include "psw/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "psw/estimators.hpp"
#include "psw/logistic.hpp"
#include "psw/parallel.hpp"

namespace psw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kTruthChunk = 8192;

// Cholesky factors of the two covariance branches of (X3, X4).
struct Chol {
    double l11, l21, l22;
};
constexpr Chol kCholX2One{1.0, 0.5, 0.8660254037844386};  // [[1,.5],[.5,1]]
const Chol kCholX2Zero{std::sqrt(2.0), 0.25 / std::sqrt(2.0),
                       std::sqrt(2.0 - 0.03125)};  // [[2,.25],[.25,2]]

}  // namespace

std::string overlap_label(double gamma, double alpha0) {
    if (gamma == 0.5 && alpha0 == 0.407) return "good";
    if (gamma == 2.5 && alpha0 == 2.074) return "poor";
    return "custom";
}

double dgp_mu0(const std::array<double, 7>& x) {
    return 0.5 - 1.2 * x[0] + 2.2 * x[1] + x[2] + 0.6 * x[3] + x[4] +
           2.0 * x[5] + x[6];
}

double dgp_cate(const std::array<double, 7>& x) {
    return 4.0 + x[1] * x[2] + 3.0 * x[4] + 6.0 * x[5] + 3.0 * x[6];
}

CovariateDraw gen_covariates(Rng& rng, const DGPConfig& cfg) {
    CovariateDraw d;
    const double x1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double x2 = rng.bernoulli(0.4 + 0.2 * x1) ? 1.0 : 0.0;
    const auto [z1, z2] = rng.normal_pair();

    const double mu3 = x1 - 0.25 * x2 + x1 * x2;
    const double mu4 = -0.25 * x1 + x2 + x1 * x2;
    const Chol& ch = x2 == 1.0 ? kCholX2One : kCholX2Zero;
    const double x3 = mu3 + ch.l11 * z1;
    const double x4 = mu4 + ch.l21 * z1 + ch.l22 * z2;

    d.x = {x1, x2, x3, x4, x3 * x3, x3 * x4, x4 * x4};
    const double lin = -0.4 * x1 - 0.4 * x2 - 0.4 * x3 - 0.4 * x4 -
                       0.1 * d.x[4] + 0.1 * d.x[5] + 0.1 * d.x[6];
    d.e_true = expit(cfg.gamma * lin - cfg.alpha0);
    return d;
}

SimUnit gen_unit(Rng& rng, const DGPConfig& cfg) {
    const CovariateDraw c = gen_covariates(rng, cfg);
    SimUnit u;
    u.x = c.x;
    u.e_true = c.e_true;
    const double eps = 2.0 * rng.normal();
    u.y0 = dgp_mu0(u.x) + eps;
    u.y1 = u.y0 + dgp_cate(u.x);
    u.a = rng.bernoulli(u.e_true) ? 1 : 0;
    u.y = u.a ? u.y1 : u.y0;
    return u;
}

Dataset make_observed_dataset(Rng& rng, int n, const DGPConfig& cfg) {
    const std::size_t p = cfg.ps_spec == PsModelSpec::correct ? 7 : 4;
    DatasetDraft draft;
    draft.outcome_kind = OutcomeKind::continuous;
    for (std::size_t j = 0; j < p; ++j)
        draft.covariate_names.push_back("X" + std::to_string(j + 1));
    draft.treatment.reserve(n);
    draft.outcome.reserve(n);
    draft.covariates.reserve(static_cast<std::size_t>(n) * p);
    for (int i = 0; i < n; ++i) {
        const SimUnit u = gen_unit(rng, cfg);
        draft.treatment.push_back(static_cast<double>(u.a));
        draft.outcome.push_back(u.y);
        for (std::size_t j = 0; j < p; ++j)
            draft.covariates.push_back(u.x[j]);
    }
    return Dataset::create(std::move(draft));
}

namespace {

// Per-chunk partial sums of the identifying functionals. For wate only
// (num, den) are used; for watt/watc all four slots are.
struct ChunkSums {
    double a = 0.0;  // treated-arm numerator
    double b = 0.0;  // treated-arm denominator
    double c = 0.0;  // control-arm numerator
    double d = 0.0;  // control-arm denominator
};

void accumulate_unit(const WeightScheme& s, const CovariateDraw& u,
                     ChunkSums& sums) {
    const double e = u.e_true;
    const double mu0 = dgp_mu0(u.x);
    const double tau = dgp_cate(u.x);
    switch (s.estimand_class) {
        case EstimandClass::wate: {
            const double h = h_wate(s, e);
            sums.a += h * tau;
            sums.b += h;
            break;
        }
        case EstimandClass::watt: {
            const double g = g_watt(s, e);
            sums.a += e * (mu0 + tau);
            sums.b += e;
            sums.c += g * e * mu0;
            sums.d += g * e;
            break;
        }
        case EstimandClass::watc: {
            const double g = g_watc(s, e);
            sums.a += g * (1.0 - e) * (mu0 + tau);
            sums.b += g * (1.0 - e);
            sums.c += (1.0 - e) * mu0;
            sums.d += 1.0 - e;
            break;
        }
    }
}

std::vector<TruthResult> combine_chunks(
    const std::vector<WeightScheme>& schemes,
    const std::vector<std::vector<ChunkSums>>& partials) {
    const std::size_t n_chunks = partials.size();
    std::vector<TruthResult> out(schemes.size());
    for (std::size_t si = 0; si < schemes.size(); ++si) {
        ChunkSums total;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            total.a += partials[c][si].a;
            total.b += partials[c][si].b;
            total.c += partials[c][si].c;
            total.d += partials[c][si].d;
        }
        const bool single_ratio =
            schemes[si].estimand_class == EstimandClass::wate;
        if (!(total.b > 0.0) || (!single_ratio && !(total.d > 0.0)))
            throw EstimationError(
                "degenerate super-population tilt (zero mass)");

        TruthResult r;
        const double r1 = total.a / total.b;
        const double r0 = single_ratio ? 0.0 : total.c / total.d;
        r.value = single_ratio ? r1 : r1 - r0;

        // chunk-level influence estimate of the oracle's own MC error
        double var = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const ChunkSums& p = partials[c][si];
            double u = (p.a - r1 * p.b) / total.b;
            if (!single_ratio) u -= (p.c - r0 * p.d) / total.d;
            var += u * u;
        }
        r.se = std::sqrt(var);
        out[si] = r;
    }
    return out;
}

}  // namespace

std::vector<TruthResult> compute_truths(
    const std::vector<WeightScheme>& schemes, std::size_t super_n,
    const DGPConfig& cfg, std::uint64_t seed, int threads) {
    if (super_n < 100000)
        throw std::invalid_argument(
            "super-population size must be at least 1e5");
    const std::size_t n_chunks = (super_n + kTruthChunk - 1) / kTruthChunk;
    std::vector<std::vector<ChunkSums>> partials(
        n_chunks, std::vector<ChunkSums>(schemes.size()));

    parallel_for(static_cast<std::int64_t>(n_chunks), threads,
                 [&](std::int64_t c) {
                     Rng rng(seed, stream::truth,
                             static_cast<std::uint64_t>(c));
                     const std::size_t begin = c * kTruthChunk;
                     const std::size_t end =
                         std::min(begin + kTruthChunk, super_n);
                     auto& sums = partials[c];
                     for (std::size_t i = begin; i < end; ++i) {
                         const CovariateDraw u = gen_covariates(rng, cfg);
                         for (std::size_t si = 0; si < schemes.size(); ++si)
                             accumulate_unit(schemes[si], u, sums[si]);
                     }
                 });
    return combine_chunks(schemes, partials);
}

TruthResult compute_truth(const WeightScheme& scheme, std::size_t super_n,
                          const DGPConfig& cfg, std::uint64_t seed,
                          int threads) {
    return compute_truths({scheme}, super_n, cfg, seed, threads).front();
}

std::vector<TruthResult> compute_truths_reference(
    const std::vector<WeightScheme>& schemes, std::size_t super_n,
    const DGPConfig& cfg, std::uint64_t seed) {
    // Same substreams as the chunked engine, naive global accumulation.
    const std::size_t n_chunks = (super_n + kTruthChunk - 1) / kTruthChunk;
    std::vector<ChunkSums> totals(schemes.size());
    std::vector<std::vector<ChunkSums>> one_chunk(
        1, std::vector<ChunkSums>(schemes.size()));
    for (std::size_t c = 0; c < n_chunks; ++c) {
        Rng rng(seed, stream::truth, c);
        const std::size_t begin = c * kTruthChunk;
        const std::size_t end = std::min(begin + kTruthChunk, super_n);
        for (std::size_t i = begin; i < end; ++i) {
            const CovariateDraw u = gen_covariates(rng, cfg);
            for (std::size_t si = 0; si < schemes.size(); ++si)
                accumulate_unit(schemes[si], u, totals[si]);
        }
    }
    one_chunk[0] = totals;
    auto results = combine_chunks(schemes, one_chunk);
    for (auto& r : results) r.se = kNaN;  // single chunk: no SE estimate
    return results;
}

SchemeSummary summarize_replicates(const std::vector<double>& estimates,
                                   const std::vector<double>& ci_lower,
                                   const std::vector<double>& ci_upper,
                                   double truth) {
    SchemeSummary s;
    std::vector<double> rbias;
    std::size_t n_covered = 0, n_ci = 0;
    double width_sum = 0.0;
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        if (!std::isfinite(estimates[r])) {
            ++s.n_failed;
            continue;
        }
        rbias.push_back(std::abs(100.0 * (estimates[r] - truth) / truth));
        if (r < ci_lower.size() && std::isfinite(ci_lower[r]) &&
            std::isfinite(ci_upper[r])) {
            ++n_ci;
            width_sum += ci_upper[r] - ci_lower[r];
            if (ci_lower[r] <= truth && truth <= ci_upper[r]) ++n_covered;
        }
    }
    if (rbias.empty()) {
        s.rbias_median = s.rbias_q1 = s.rbias_q3 = kNaN;
    } else {
        std::sort(rbias.begin(), rbias.end());
        s.rbias_q1 = quantile_type7(rbias, 0.25);
        s.rbias_median = quantile_type7(rbias, 0.5);
        s.rbias_q3 = quantile_type7(rbias, 0.75);
    }
    if (n_ci == 0) {
        s.coverage = kNaN;
        s.mean_ci_width = kNaN;
    } else {
        s.coverage =
            static_cast<double>(n_covered) / static_cast<double>(n_ci);
        s.mean_ci_width = width_sum / static_cast<double>(n_ci);
    }
    return s;
}

namespace {

struct McReplicate {
    std::vector<double> estimates;  // per scheme; NaN on failure
    std::vector<double> ci_lower;
    std::vector<double> ci_upper;
    std::size_t n_treated = 0;
};

McReplicate run_mc_replicate(const std::vector<WeightScheme>& schemes,
                             const DGPConfig& cfg, const McOptions& opts,
                             int replicate) {
    McReplicate out;
    out.estimates.assign(schemes.size(), kNaN);
    out.ci_lower.assign(schemes.size(), kNaN);
    out.ci_upper.assign(schemes.size(), kNaN);

    Rng rng(opts.seed, stream::mc_data,
            static_cast<std::uint64_t>(replicate));
    const Dataset d = make_observed_dataset(rng, opts.n, cfg);
    out.n_treated = d.n_treated();

    std::vector<EstimandSpec> specs;
    specs.reserve(schemes.size());
    for (const auto& s : schemes) specs.push_back({s, Measure::rd});

    if (opts.n_boot > 0) {
        BootstrapOptions bopt;
        bopt.n_boot = opts.n_boot;
        bopt.seed = mix64(opts.seed ^
                          mix64(0x6273656564ULL +
                                static_cast<std::uint64_t>(replicate)));
        bopt.ci_method = opts.ci_method;
        bopt.alpha_level = opts.alpha_level;
        bopt.threads = 1;  // parallelism lives at the replicate level
        bopt.fit = opts.fit;
        std::vector<std::string> errors;
        try {
            auto effects = bootstrap_many(d, specs, bopt, nullptr, &errors);
            for (std::size_t si = 0; si < schemes.size(); ++si) {
                if (!errors[si].empty()) continue;
                out.estimates[si] = effects[si].point;
                out.ci_lower[si] = effects[si].ci_lower;
                out.ci_upper[si] = effects[si].ci_upper;
            }
        } catch (const FitError&) {
            // full-sample PS fit failed: every scheme fails this replicate
        }
    } else {
        try {
            const PSFit fit = fit_logistic(d, opts.fit);
            const ResolvedPs ps = resolve_ps(d, &fit, opts.fit);
            for (std::size_t si = 0; si < schemes.size(); ++si) {
                try {
                    out.estimates[si] =
                        estimate_point(d, ps.ps, specs[si]).estimate;
                } catch (const EstimationError&) {
                }
            }
        } catch (const FitError&) {
        }
    }
    return out;
}

SimResult run_monte_carlo_impl(const std::vector<WeightScheme>& schemes,
                               const DGPConfig& cfg, const McOptions& opts,
                               bool parallel) {
    if (opts.m < 1)
        throw std::invalid_argument(
            "monte carlo requires at least 1 replicate");
    if (opts.n < 2)
        throw std::invalid_argument("replicate sample size must be >= 2");

    SimResult result;
    result.config = cfg;
    result.opts = opts;
    result.overlap = overlap_label(cfg.gamma, cfg.alpha0);

    const auto truths = compute_truths(schemes, opts.super_n, cfg,
                                       opts.truth_seed, opts.threads);

    std::vector<McReplicate> reps(opts.m);
    auto body = [&](std::int64_t r) {
        reps[r] = run_mc_replicate(schemes, cfg, opts, static_cast<int>(r));
    };
    if (parallel) {
        parallel_for(opts.m, opts.threads, body);
    } else {
        for (std::int64_t r = 0; r < opts.m; ++r) body(r);
    }

    std::size_t treated_total = 0;
    for (const auto& rep : reps) treated_total += rep.n_treated;
    result.realized_treated_frac =
        static_cast<double>(treated_total) /
        (static_cast<double>(opts.m) * static_cast<double>(opts.n));

    const double nominal = 1.0 - opts.alpha_level;
    const double half = 1.96 * std::sqrt(nominal * (1.0 - nominal) /
                                         static_cast<double>(opts.m));
    result.cp_band_lo = nominal - half;
    result.cp_band_hi = nominal + half;

    for (std::size_t si = 0; si < schemes.size(); ++si) {
        SchemeSim s;
        s.label = scheme_label(schemes[si]);
        s.scheme = schemes[si];
        s.truth = truths[si].value;
        s.truth_se = truths[si].se;
        s.estimates.resize(opts.m);
        s.ci_lower.resize(opts.m);
        s.ci_upper.resize(opts.m);
        s.rbias_pct.resize(opts.m);
        for (int r = 0; r < opts.m; ++r) {
            s.estimates[r] = reps[r].estimates[si];
            s.ci_lower[r] = reps[r].ci_lower[si];
            s.ci_upper[r] = reps[r].ci_upper[si];
            s.rbias_pct[r] =
                std::isfinite(s.estimates[r])
                    ? std::abs(100.0 * (s.estimates[r] - s.truth) / s.truth)
                    : kNaN;
        }
        s.summary =
            summarize_replicates(s.estimates, s.ci_lower, s.ci_upper, s.truth);
        result.schemes.push_back(std::move(s));
    }
    return result;
}

}  // namespace

SimResult run_monte_carlo(const std::vector<WeightScheme>& schemes,
                          const DGPConfig& cfg, const McOptions& opts) {
    return run_monte_carlo_impl(schemes, cfg, opts, true);
}

SimResult run_monte_carlo_reference(const std::vector<WeightScheme>& schemes,
                                    const DGPConfig& cfg,
                                    const McOptions& opts) {
    return run_monte_carlo_impl(schemes, cfg, opts, false);
}

}  // namespace psw
