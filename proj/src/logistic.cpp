#include "psw/logistic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace psw {

namespace {

// log(1 + exp(x)) without overflow
double log1pexp(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y[i] * eta[i] - log1pexp(eta[i]);
    return ll;
}

}  // namespace

PSFit fit_logistic(std::span<const int> a,
                   std::span<const std::span<const double>> columns,
                   const FitOptions& opt) {
    const Eigen::Index n = static_cast<Eigen::Index>(a.size());
    const Eigen::Index p = static_cast<Eigen::Index>(columns.size());
    const Eigen::Index k = p + 1;  // intercept-augmented width

    if (n <= k)
        throw FitError("need more rows than coefficients (N > p + 1)");

    Eigen::MatrixXd design(n, k);
    design.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (static_cast<Eigen::Index>(columns[j].size()) != n)
            throw FitError("covariate column length mismatch");
        for (Eigen::Index i = 0; i < n; ++i) design(i, j + 1) = columns[j][i];
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = static_cast<double>(a[i]);

    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) throw FitError("collinear covariates");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd prob(n), score(k);

    PSFit fit;
    fit.loglik_path.reserve(opt.max_iter);
    double loglik = bernoulli_loglik(eta, y);
    double score_norm = std::numeric_limits<double>::infinity();

    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) prob[i] = expit(eta[i]);
        score.noalias() = design.transpose() * (y - prob);
        score_norm = score.lpNorm<Eigen::Infinity>();
        if (score_norm <= opt.tol) break;
        if (beta.lpNorm<Eigen::Infinity>() > opt.separation_beta)
            throw FitError("possible complete separation");

        Eigen::VectorXd irls_w = prob.array() * (1.0 - prob.array());
        Eigen::MatrixXd hessian =
            design.transpose() * irls_w.asDiagonal() * design;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        if (ldlt.info() != Eigen::Success)
            throw FitError("singular IRLS system");
        Eigen::VectorXd delta = ldlt.solve(score);
        if (!delta.allFinite()) throw FitError("singular IRLS system");

        // step halving keeps the log-likelihood monotone
        double step = 1.0;
        Eigen::VectorXd beta_new;
        Eigen::VectorXd eta_new;
        double ll_new = -std::numeric_limits<double>::infinity();
        for (int h = 0; h <= opt.max_halvings; ++h) {
            beta_new = beta + step * delta;
            eta_new.noalias() = design * beta_new;
            ll_new = bernoulli_loglik(eta_new, y);
            if (ll_new >= loglik || h == opt.max_halvings) break;
            step *= 0.5;
        }
        beta = std::move(beta_new);
        eta = std::move(eta_new);
        loglik = ll_new;
        fit.loglik_path.push_back(loglik);
    }

    if (score_norm > opt.tol &&
        beta.lpNorm<Eigen::Infinity>() > opt.separation_beta)
        throw FitError("possible complete separation");
    // A maximized log-likelihood at (numerically) zero means every unit is
    // classified perfectly, which only separated data can achieve.
    if (loglik > -1e-6) throw FitError("possible complete separation");

    fit.converged = score_norm <= opt.tol;
    fit.iterations = iter;
    fit.max_abs_score = score_norm;
    fit.coefficients.assign(beta.data(), beta.data() + k);
    fit.fitted_ps.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double e = expit(eta[i]);
        if (e < opt.clamp_lo) {
            e = opt.clamp_lo;
            ++fit.clamped_count;
        } else if (e > opt.clamp_hi) {
            e = opt.clamp_hi;
            ++fit.clamped_count;
        }
        fit.fitted_ps[i] = e;
    }
    return fit;
}

PSFit fit_logistic(const Dataset& d, const FitOptions& opt) {
    std::vector<std::span<const double>> columns;
    columns.reserve(d.n_covariates());
    for (std::size_t j = 0; j < d.n_covariates(); ++j)
        columns.push_back(d.covariate_column(j));
    return fit_logistic(std::span<const int>(d.treatment()),
                        std::span<const std::span<const double>>(columns),
                        opt);
}

ResolvedPs resolve_ps(const Dataset& d, const PSFit* fit,
                      const FitOptions& opt) {
    const bool provided = d.has_provided_ps();
    if (provided && fit)
        throw FitError("ambiguous PS source: both provided PS and a model "
                       "fit were given");
    if (!provided && !fit)
        throw FitError("no PS source: supply a PS column or fit a model");

    ResolvedPs out;
    if (provided) {
        out.source = PsSource::provided;
        out.ps = d.provided_ps();
        for (double& e : out.ps) {
            if (e < opt.clamp_lo) {
                e = opt.clamp_lo;
                ++out.clamped_count;
            } else if (e > opt.clamp_hi) {
                e = opt.clamp_hi;
                ++out.clamped_count;
            }
        }
    } else {
        out.source = PsSource::fitted;
        out.ps = fit->fitted_ps;
        out.clamped_count = fit->clamped_count;
    }
    return out;
}

}  // namespace psw
