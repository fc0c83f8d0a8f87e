#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psw/dataset.hpp"

namespace psw {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    double tol = 1e-8;       // sup-norm of the score at convergence
    int max_iter = 100;
    int max_halvings = 20;   // step halvings per IRLS update
    double separation_beta = 1e3;  // |beta|_inf beyond this => separation
    double clamp_lo = 1e-6;
    double clamp_hi = 1.0 - 1e-6;
};

/// Fitted logistic propensity model.
struct PSFit {
    std::vector<double> coefficients;  // intercept first, then covariates
    std::vector<double> fitted_ps;     // clamped into [clamp_lo, clamp_hi]
    bool converged = false;
    int iterations = 0;
    double max_abs_score = 0.0;        // final gradient sup-norm
    std::size_t clamped_count = 0;
    std::vector<double> loglik_path;   // log-likelihood after each update
};

/// Maximum-likelihood logistic regression of a on an intercept plus the
/// given covariate columns, via iteratively reweighted least squares with
/// step halving. Throws FitError on rank-deficient designs ("collinear
/// covariates") and on likely complete separation; plain non-convergence
/// is reported through PSFit::converged instead.
PSFit fit_logistic(std::span<const int> a,
                   std::span<const std::span<const double>> columns,
                   const FitOptions& opt = {});

PSFit fit_logistic(const Dataset& d, const FitOptions& opt = {});

enum class PsSource { fitted, provided };

struct ResolvedPs {
    std::vector<double> ps;  // clamped
    PsSource source = PsSource::fitted;
    std::size_t clamped_count = 0;
};

/// Select the propensity-score vector for analysis: exactly one of the
/// dataset's provided PS column or a model fit must be present.
ResolvedPs resolve_ps(const Dataset& d, const PSFit* fit,
                      const FitOptions& opt = {});

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace psw
