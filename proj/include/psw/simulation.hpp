#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "psw/bootstrap.hpp"
#include "psw/dataset.hpp"
#include "psw/rng.hpp"
#include "psw/tilting.hpp"

namespace psw {

enum class PsModelSpec { correct, misspecified };

/// Synthetic data-generating process: two correlated binary covariates,
/// a bivariate-normal pair whose moments depend on them, three quadratic
/// terms, a logistic treatment model scaled by gamma and shifted by
/// alpha0, and heterogeneous additive treatment effects.
struct DGPConfig {
    double gamma = 0.5;
    double alpha0 = 0.407;
    PsModelSpec ps_spec = PsModelSpec::correct;
};

/// "good" / "poor" for the two canonical (gamma, alpha0) settings,
/// otherwise "custom".
std::string overlap_label(double gamma, double alpha0);

struct CovariateDraw {
    std::array<double, 7> x;
    double e_true = 0.0;
};

struct SimUnit {
    std::array<double, 7> x;
    double e_true = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    int a = 0;
    double y = 0.0;
};

/// Noiseless conditional mean of the control potential outcome.
double dgp_mu0(const std::array<double, 7>& x);
/// Conditional average treatment effect.
double dgp_cate(const std::array<double, 7>& x);

/// Covariates plus true PS; consumes exactly 4 uniforms.
CovariateDraw gen_covariates(Rng& rng, const DGPConfig& cfg);
/// Full observed unit (adds outcome noise and the treatment draw);
/// consumes exactly 7 uniforms.
SimUnit gen_unit(Rng& rng, const DGPConfig& cfg);

/// Observed dataset of n units; covariate columns are X1..X7 under the
/// correct PS model spec and X1..X4 under the misspecified one.
Dataset make_observed_dataset(Rng& rng, int n, const DGPConfig& cfg);

struct TruthResult {
    double value = 0.0;
    double se = 0.0;  // Monte Carlo standard error of the oracle itself
};

/// Super-population estimand values: empirical averages of the identifying
/// functionals over super_n draws with true PS and noiseless conditional
/// means. All schemes share one pass over the same draw. Accumulation is
/// chunked with fixed-size chunks and per-chunk substreams, so the result
/// is identical for any thread count.
std::vector<TruthResult> compute_truths(const std::vector<WeightScheme>& schemes,
                                        std::size_t super_n,
                                        const DGPConfig& cfg,
                                        std::uint64_t seed, int threads = 0);

TruthResult compute_truth(const WeightScheme& scheme, std::size_t super_n,
                          const DGPConfig& cfg, std::uint64_t seed,
                          int threads = 0);

/// Straight serial loop over units (same substreams, naive accumulation);
/// reference implementation for the chunked engine.
std::vector<TruthResult> compute_truths_reference(
    const std::vector<WeightScheme>& schemes, std::size_t super_n,
    const DGPConfig& cfg, std::uint64_t seed);

struct McOptions {
    int m = 1000;       // Monte Carlo replicates
    int n = 2000;       // observed units per replicate
    int n_boot = 200;   // bootstrap replicates; 0 disables CIs
    std::uint64_t seed = 0;
    std::size_t super_n = 1'000'000;
    std::uint64_t truth_seed = 1;
    double alpha_level = 0.05;
    CiMethod ci_method = CiMethod::normal;
    int threads = 0;
    FitOptions fit;
};

struct SchemeSummary {
    double rbias_median = 0.0;
    double rbias_q1 = 0.0;
    double rbias_q3 = 0.0;
    double coverage = 0.0;       // NaN when CIs were not computed
    double mean_ci_width = 0.0;  // NaN when CIs were not computed
    int n_failed = 0;
};

/// Aggregate per-replicate estimates/CIs against a truth value. Failed
/// replicates are marked by NaN estimates and only counted.
SchemeSummary summarize_replicates(const std::vector<double>& estimates,
                                   const std::vector<double>& ci_lower,
                                   const std::vector<double>& ci_upper,
                                   double truth);

struct SchemeSim {
    std::string label;
    WeightScheme scheme;
    double truth = 0.0;
    double truth_se = 0.0;
    std::vector<double> estimates;  // NaN where the replicate failed
    std::vector<double> ci_lower;
    std::vector<double> ci_upper;
    std::vector<double> rbias_pct;  // NaN where the replicate failed
    SchemeSummary summary;
};

struct SimResult {
    DGPConfig config;
    McOptions opts;
    std::string overlap;            // good / poor / custom
    double cp_band_lo = 0.0;        // nominal +- 1.96 * binomial SE
    double cp_band_hi = 0.0;
    double realized_treated_frac = 0.0;
    std::vector<SchemeSim> schemes;
};

/// Full Monte Carlo study: M independent replicates (generate, fit PS,
/// estimate every scheme, bootstrap), aggregated into relative-bias and
/// coverage summaries against super-population truths. Deterministic for
/// fixed (config, opts) regardless of thread count.
SimResult run_monte_carlo(const std::vector<WeightScheme>& schemes,
                          const DGPConfig& cfg, const McOptions& opts);

/// Serial reference for the parallel replicate loop.
SimResult run_monte_carlo_reference(const std::vector<WeightScheme>& schemes,
                                    const DGPConfig& cfg,
                                    const McOptions& opts);

}  // namespace psw
