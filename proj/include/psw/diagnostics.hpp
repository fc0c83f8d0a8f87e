#pragma once

#include <span>
#include <string>
#include <vector>

#include "psw/dataset.hpp"
#include "psw/logistic.hpp"
#include "psw/tilting.hpp"

namespace psw {

/// Effective sample size (sum w)^2 / sum w^2. Throws EstimationError when
/// every weight is zero.
double ess(std::span<const double> w);

/// Absolute standardized mean difference of covariate j under weights w:
/// |weighted mean difference| over the pooled unweighted per-arm sample
/// standard deviations. Returns NaN when the pooled denominator is zero
/// (constant covariate in both arms).
double asmd(const Dataset& d, std::span<const double> w, std::size_t j);

struct ArmQuartiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct OverlapSummary {
    ArmQuartiles treated;
    ArmQuartiles control;
    std::vector<double> alphas;
    // fraction of units with ps < alpha or ps > 1 - alpha, per alpha
    std::vector<double> extreme_treated;
    std::vector<double> extreme_control;
    std::vector<double> extreme_overall;
    std::vector<double> bin_edges;  // n_bins + 1 edges over (0, 1)
    std::vector<std::size_t> counts_treated;
    std::vector<std::size_t> counts_control;
};

/// Per-arm PS distribution summary: quartiles, extreme-PS fractions for a
/// list of thresholds, and fixed-width histogram counts over (0, 1).
OverlapSummary overlap_summary(std::span<const double> ps,
                               std::span<const int> a,
                               std::span<const double> alphas,
                               int n_bins = 30);

struct SchemeBalance {
    std::string label;
    WeightScheme scheme;
    double ess_treated = 0.0;
    double ess_control = 0.0;
    double ess_total = 0.0;
    std::vector<double> asmd;  // per covariate; NaN = undefined
};

struct BalanceReport {
    std::vector<std::string> covariates;
    std::vector<double> asmd_unweighted;
    std::vector<SchemeBalance> schemes;
    OverlapSummary overlap;
    std::size_t clamped_count = 0;
    PsSource ps_source = PsSource::fitted;
    std::size_t n_treated = 0;
    std::size_t n_controls = 0;
};

BalanceReport balance_report(const Dataset& d, std::span<const double> ps,
                             const std::vector<WeightScheme>& schemes,
                             std::span<const double> alphas,
                             std::size_t clamped_count, PsSource source);

}  // namespace psw
