#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psw/dataset.hpp"
#include "psw/tilting.hpp"

namespace psw {

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Measure { rd, rr, odds_ratio };

std::string to_string(Measure m);
Measure parse_measure(std::string_view text);

/// What to estimate: a weighting scheme plus an effect measure.
/// rr / odds_ratio require a binary outcome.
struct EstimandSpec {
    WeightScheme scheme;
    Measure measure = Measure::rd;
};

struct PointResult {
    double estimate = 0.0;
    double treated_mean = 0.0;
    double control_mean = 0.0;
    double sum_weight_treated = 0.0;
    double sum_weight_control = 0.0;
    std::size_t zero_weight_treated = 0;
    std::size_t zero_weight_control = 0;
};

struct ArmMeans {
    double treated_mean = 0.0;
    double control_mean = 0.0;
    double sum_weight_treated = 0.0;
    double sum_weight_control = 0.0;
    std::size_t zero_weight_treated = 0;
    std::size_t zero_weight_control = 0;
};

/// Normalized weighted outcome means per arm. Throws EstimationError
/// ("degenerate weighted arm") when either arm's total weight is not a
/// positive finite number.
ArmMeans weighted_arm_means(std::span<const double> y,
                            std::span<const int> a,
                            std::span<const double> w);

/// Combine arm means into the requested measure. Throws EstimationError
/// ("undefined ratio measure") for rr with a zero control mean and for
/// odds_ratio with boundary proportions.
double combine_measure(Measure m, double treated_mean, double control_mean);

PointResult estimate_point(const Dataset& d, std::span<const double> ps,
                           const EstimandSpec& spec);

/// Same computation on raw arrays; used by the resampling engines.
PointResult estimate_point_raw(std::span<const double> y,
                               std::span<const int> a,
                               std::span<const double> ps,
                               const EstimandSpec& spec);

/// Scheme variants to add to the default per-class catalog.
struct CatalogRequest {
    std::vector<double> beta_nus;
    std::vector<double> trim_alphas;
    std::vector<double> trunc_alphas;
    std::vector<double> smooth_trim_alphas;
    double smooth_trim_epsilon = 0.01;
    std::vector<double> tw_ks;  // wate only
};

/// Scheme rows in catalog order: overall [treated control] overlap
/// matching entropy, then beta, trimming, truncation, smooth trimming
/// and trapezoidal variants in request order.
std::vector<WeightScheme> scheme_catalog(EstimandClass cls,
                                         const CatalogRequest& req = {});

struct EstimateRow {
    std::string label;
    WeightScheme scheme;
    Measure measure = Measure::rd;
    std::optional<PointResult> result;  // empty when error is set
    std::string error;
};

/// Point estimates for a batch of estimands; failures are recorded on the
/// affected row instead of aborting the table.
std::vector<EstimateRow> estimate_all(const Dataset& d,
                                      std::span<const double> ps,
                                      const std::vector<EstimandSpec>& specs);

}  // namespace psw
