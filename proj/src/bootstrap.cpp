#include "psw/bootstrap.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "psw/parallel.hpp"
#include "psw/rng.hpp"
#include "psw/tilting.hpp"

namespace psw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Attempt k of replicate b draws from substream b * 64 + k; 64 bounds the
// redraw chain so substreams never collide across replicates.
constexpr int kMaxAttemptSlots = 64;

struct ReplicateOutcome {
    std::vector<double> estimates;     // one per spec
    std::vector<int> attempts_needed;  // one per spec
    std::vector<char> exhausted;       // one per spec
};

struct Resample {
    std::vector<int> a;
    std::vector<double> y;
    std::vector<std::vector<double>> columns;
    std::vector<double> ps;
    bool usable = false;
};

Resample draw_resample(const Dataset& d, const std::vector<double>& base_ps,
                       bool refit_ps, const FitOptions& fit_opt,
                       std::uint64_t seed, int replicate, int attempt) {
    const std::size_t n = d.n();
    const std::size_t p = d.n_covariates();
    Rng rng(seed, stream::bootstrap,
            static_cast<std::uint64_t>(replicate) * kMaxAttemptSlots +
                static_cast<std::uint64_t>(attempt));

    Resample s;
    s.a.resize(n);
    s.y.resize(n);
    s.columns.assign(p, std::vector<double>(n));
    if (!refit_ps) s.ps.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = rng.index(n);
        s.a[i] = d.treatment()[idx];
        s.y[i] = d.outcome()[idx];
        for (std::size_t j = 0; j < p; ++j)
            s.columns[j][i] = d.covariate_column(j)[idx];
        if (!refit_ps) s.ps[i] = base_ps[idx];
    }

    if (refit_ps) {
        try {
            std::vector<std::span<const double>> spans(s.columns.begin(),
                                                       s.columns.end());
            PSFit fit = fit_logistic(
                std::span<const int>(s.a),
                std::span<const std::span<const double>>(spans), fit_opt);
            s.ps = std::move(fit.fitted_ps);
        } catch (const FitError&) {
            return s;  // unusable; caller redraws
        }
    }
    s.usable = true;
    return s;
}

bool estimate_ok(const Resample& s, const EstimandSpec& spec, bool need_log,
                 double* out) {
    if (!s.usable) return false;
    try {
        const PointResult r = estimate_point_raw(s.y, s.a, s.ps, spec);
        if (!std::isfinite(r.estimate)) return false;
        if (need_log && !(r.estimate > 0.0)) return false;
        *out = r.estimate;
        return true;
    } catch (const EstimationError&) {
        return false;
    }
}

ReplicateOutcome run_replicate(const Dataset& d,
                               const std::vector<EstimandSpec>& specs,
                               const std::vector<char>& active,
                               const std::vector<double>& base_ps,
                               bool refit_ps, const BootstrapOptions& opt,
                               int replicate) {
    const bool need_log = opt.ci_method == CiMethod::lognormal;
    const int max_attempts = std::min(opt.max_attempts, kMaxAttemptSlots);

    ReplicateOutcome out;
    out.estimates.assign(specs.size(), kNaN);
    out.attempts_needed.assign(specs.size(), 1);
    out.exhausted.assign(specs.size(), 0);

    Resample shared = draw_resample(d, base_ps, refit_ps, opt.fit, opt.seed,
                                    replicate, 0);
    std::vector<Resample> later;  // lazily drawn redraw chain, shared

    for (std::size_t si = 0; si < specs.size(); ++si) {
        if (!active[si]) continue;
        double est = 0.0;
        if (estimate_ok(shared, specs[si], need_log, &est)) {
            out.estimates[si] = est;
            continue;
        }
        bool done = false;
        for (int k = 1; k < max_attempts; ++k) {
            if (static_cast<int>(later.size()) < k)
                later.push_back(draw_resample(d, base_ps, refit_ps, opt.fit,
                                              opt.seed, replicate, k));
            out.attempts_needed[si] = k + 1;
            if (estimate_ok(later[k - 1], specs[si], need_log, &est)) {
                out.estimates[si] = est;
                done = true;
                break;
            }
        }
        if (!done) out.exhausted[si] = 1;
    }
    return out;
}

struct Aggregate {
    double mean = 0.0;
    double variance = 0.0;  // 1/B convention
};

Aggregate moments(const std::vector<double>& values) {
    Aggregate agg;
    const double b = static_cast<double>(values.size());
    for (const double v : values) agg.mean += v;
    agg.mean /= b;
    for (const double v : values) {
        const double dev = v - agg.mean;
        agg.variance += dev * dev;
    }
    agg.variance /= b;
    return agg;
}

EffectEstimate failed_estimate(const BootstrapOptions& opt, bool refit_ps) {
    EffectEstimate r;
    r.point = kNaN;
    r.ci_lower = kNaN;
    r.ci_upper = kNaN;
    r.ci_method = opt.ci_method;
    r.n_boot = opt.n_boot;
    r.conf_level = 1.0 - opt.alpha_level;
    r.ps_refit = refit_ps;
    return r;
}

std::vector<EffectEstimate> bootstrap_impl(
    const Dataset& d, const std::vector<EstimandSpec>& specs,
    const BootstrapOptions& opt,
    std::vector<std::vector<double>>* replicates_out,
    std::vector<std::string>* spec_errors, bool parallel) {
    if (opt.n_boot < 2)
        throw std::invalid_argument(
            "bootstrap requires at least 2 replicates");
    if (!(opt.alpha_level > 0.0 && opt.alpha_level < 1.0))
        throw std::invalid_argument("alpha level must be in (0,1)");
    if (opt.ci_method == CiMethod::lognormal)
        for (const auto& spec : specs)
            if (spec.measure == Measure::rd)
                throw std::invalid_argument(
                    "lognormal CIs apply to ratio measures only");

    const bool lenient = spec_errors != nullptr;
    if (lenient) spec_errors->assign(specs.size(), "");

    // Full-sample point estimates: validates that each estimand is defined
    // before any resampling happens.
    const bool refit_ps = !d.has_provided_ps();
    PSFit full_fit;
    ResolvedPs resolved;
    if (refit_ps) {
        full_fit = fit_logistic(d, opt.fit);
        resolved = resolve_ps(d, &full_fit, opt.fit);
    } else {
        resolved = resolve_ps(d, nullptr, opt.fit);
    }
    std::vector<double> points(specs.size(), kNaN);
    std::vector<char> active(specs.size(), 1);
    for (std::size_t si = 0; si < specs.size(); ++si) {
        try {
            const PointResult r = estimate_point(d, resolved.ps, specs[si]);
            if (opt.ci_method == CiMethod::lognormal && !(r.estimate > 0.0))
                throw EstimationError(
                    "lognormal CI requires a positive point estimate");
            points[si] = r.estimate;
        } catch (const EstimationError& err) {
            if (!lenient) throw;
            (*spec_errors)[si] = err.what();
            active[si] = 0;
        }
    }

    const int b_total = opt.n_boot;
    std::vector<ReplicateOutcome> outcomes(b_total);
    auto body = [&](std::int64_t b) {
        outcomes[b] = run_replicate(d, specs, active, resolved.ps, refit_ps,
                                    opt, static_cast<int>(b));
    };
    if (parallel) {
        parallel_for(b_total, opt.threads, body);
    } else {
        for (std::int64_t b = 0; b < b_total; ++b) body(b);
    }

    std::vector<std::size_t> redraws(specs.size(), 0);
    for (int b = 0; b < b_total; ++b) {
        for (std::size_t si = 0; si < specs.size(); ++si) {
            if (!active[si]) continue;
            if (outcomes[b].exhausted[si]) {
                std::ostringstream os;
                os << "replicate " << b << ": more than " << opt.max_attempts
                   << " degenerate resamples";
                if (!lenient) throw EstimationError(os.str());
                (*spec_errors)[si] = os.str();
                active[si] = 0;
            }
            redraws[si] += static_cast<std::size_t>(
                outcomes[b].attempts_needed[si] - 1);
        }
    }

    const double conf_level = 1.0 - opt.alpha_level;
    const double z = normal_quantile(1.0 - opt.alpha_level / 2.0);

    std::vector<EffectEstimate> results(specs.size());
    if (replicates_out) replicates_out->assign(specs.size(), {});
    for (std::size_t si = 0; si < specs.size(); ++si) {
        if (!active[si]) {
            results[si] = failed_estimate(opt, refit_ps);
            continue;
        }
        std::vector<double> est(b_total);
        for (int b = 0; b < b_total; ++b) est[b] = outcomes[b].estimates[si];
        if (replicates_out) (*replicates_out)[si] = est;

        EffectEstimate r;
        r.point = points[si];
        r.ci_method = opt.ci_method;
        r.n_boot = b_total;
        r.degenerate_redraws = redraws[si];
        r.conf_level = conf_level;
        r.ps_refit = refit_ps;

        switch (opt.ci_method) {
            case CiMethod::normal: {
                const Aggregate agg = moments(est);
                const double se = std::sqrt(agg.variance);
                r.se = se;
                r.ci_lower = r.point - z * se;
                r.ci_upper = r.point + z * se;
                break;
            }
            case CiMethod::quantile: {
                std::vector<double> sorted = est;
                std::sort(sorted.begin(), sorted.end());
                r.ci_lower = quantile_type7(sorted, opt.alpha_level / 2.0);
                r.ci_upper =
                    quantile_type7(sorted, 1.0 - opt.alpha_level / 2.0);
                break;
            }
            case CiMethod::lognormal: {
                std::vector<double> logs(est.size());
                for (std::size_t b = 0; b < est.size(); ++b)
                    logs[b] = std::log(est[b]);
                const Aggregate log_agg = moments(logs);
                const double log_se = std::sqrt(log_agg.variance);
                const Aggregate raw_agg = moments(est);
                r.se = std::sqrt(raw_agg.variance);
                r.ci_lower = r.point * std::exp(-z * log_se);
                r.ci_upper = r.point * std::exp(z * log_se);
                break;
            }
        }
        results[si] = std::move(r);
    }
    return results;
}

}  // namespace

double quantile_type7(const std::vector<double>& sorted, double q) {
    if (sorted.empty())
        throw std::invalid_argument("quantile of empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit_normal(0.0,
                                                                      1.0);
    return boost::math::quantile(unit_normal, p);
}

std::string to_string(CiMethod m) {
    switch (m) {
        case CiMethod::normal:
            return "normal";
        case CiMethod::quantile:
            return "quantile";
        case CiMethod::lognormal:
            return "lognormal";
    }
    throw std::invalid_argument("unknown ci method");
}

CiMethod parse_ci_method(std::string_view text) {
    if (text == "normal") return CiMethod::normal;
    if (text == "quantile") return CiMethod::quantile;
    if (text == "lognormal") return CiMethod::lognormal;
    throw std::invalid_argument("unknown ci method '" + std::string(text) +
                                "'");
}

std::vector<EffectEstimate> bootstrap_many(
    const Dataset& d, const std::vector<EstimandSpec>& specs,
    const BootstrapOptions& opt, std::vector<std::vector<double>>* replicates,
    std::vector<std::string>* spec_errors) {
    return bootstrap_impl(d, specs, opt, replicates, spec_errors, true);
}

std::vector<EffectEstimate> bootstrap_many_reference(
    const Dataset& d, const std::vector<EstimandSpec>& specs,
    const BootstrapOptions& opt,
    std::vector<std::vector<double>>* replicates) {
    return bootstrap_impl(d, specs, opt, replicates, nullptr, false);
}

EffectEstimate bootstrap(const Dataset& d, const EstimandSpec& spec,
                         const BootstrapOptions& opt,
                         std::vector<double>* replicates) {
    std::vector<std::vector<double>> reps;
    auto results = bootstrap_impl(d, {spec}, opt,
                                  replicates ? &reps : nullptr, nullptr, true);
    if (replicates) *replicates = std::move(reps.front());
    return results.front();
}

}  // namespace psw
