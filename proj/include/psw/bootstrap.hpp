#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psw/dataset.hpp"
#include "psw/estimators.hpp"
#include "psw/logistic.hpp"

namespace psw {

enum class CiMethod { normal, quantile, lognormal };

std::string to_string(CiMethod m);
CiMethod parse_ci_method(std::string_view text);

struct BootstrapOptions {
    int n_boot = 200;
    std::uint64_t seed = 0;
    CiMethod ci_method = CiMethod::normal;
    double alpha_level = 0.05;  // significance level; conf = 1 - alpha_level
    int threads = 0;            // 0 = all available
    int max_attempts = 10;      // resample attempts per replicate
    FitOptions fit;
};

struct EffectEstimate {
    double point = 0.0;
    std::optional<double> se;  // absent for quantile CIs
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    CiMethod ci_method = CiMethod::normal;
    int n_boot = 0;
    std::size_t degenerate_redraws = 0;
    double conf_level = 0.95;
    /// False when user-supplied PS values were reused in replicates, in
    /// which case PS-estimation uncertainty is not propagated.
    bool ps_refit = true;
};

/// Nonparametric bootstrap of one estimand: B with-replacement resamples,
/// PS refit inside each replicate (unless the dataset carries provided
/// PS), variance/CI per the selected method. Replicate substreams depend
/// only on (seed, replicate, attempt), so results are bit-identical for
/// any thread count. Degenerate replicates (an empty or zero-weight arm,
/// an undefined ratio, a failed PS refit) are redrawn on their own
/// substream chain, up to max_attempts per replicate.
EffectEstimate bootstrap(const Dataset& d, const EstimandSpec& spec,
                         const BootstrapOptions& opt,
                         std::vector<double>* replicates = nullptr);

/// Batch variant sharing each replicate's resample and PS refit across all
/// specs. Element i equals bootstrap(d, specs[i], opt) exactly.
///
/// When `spec_errors` is supplied, spec-level failures (undefined
/// full-sample point, exhausted redraws for that spec) are recorded there
/// instead of thrown; the affected element carries NaN fields.
std::vector<EffectEstimate> bootstrap_many(
    const Dataset& d, const std::vector<EstimandSpec>& specs,
    const BootstrapOptions& opt,
    std::vector<std::vector<double>>* replicates = nullptr,
    std::vector<std::string>* spec_errors = nullptr);

/// Plain serial loop with the same substream contract; kept as the
/// reference implementation for the parallel engine.
std::vector<EffectEstimate> bootstrap_many_reference(
    const Dataset& d, const std::vector<EstimandSpec>& specs,
    const BootstrapOptions& opt,
    std::vector<std::vector<double>>* replicates = nullptr);

/// Type-7 (linear interpolation of order statistics) sample quantile.
/// `sorted` must be ascending and non-empty.
double quantile_type7(const std::vector<double>& sorted, double q);

/// Standard normal quantile function.
double normal_quantile(double p);

}  // namespace psw
