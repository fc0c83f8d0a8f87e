#include "psw/dataset.hpp"

#include <cmath>
#include <sstream>

namespace psw {

namespace {

bool is_finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<std::string> Dataset::check(const DatasetDraft& draft) {
    std::vector<std::string> report;
    const std::size_t n = draft.treatment.size();
    const std::size_t p = draft.covariate_names.size();

    if (n < 2) report.push_back("dataset must contain at least 2 rows");
    if (draft.outcome.size() != n)
        report.push_back("outcome length does not match treatment length");
    if (p > 0 && draft.covariates.size() != n * p)
        report.push_back("covariate matrix size does not match N x p");
    if (draft.provided_ps && draft.provided_ps->size() != n)
        report.push_back("provided PS length does not match treatment length");
    if (!draft.unit_ids.empty() && draft.unit_ids.size() != n)
        report.push_back("unit id length does not match treatment length");
    if (!report.empty()) return report;  // shapes broken, skip cell checks

    std::size_t n_treated = 0;
    std::size_t n_controls = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = draft.treatment[i];
        if (a == 0.0) {
            ++n_controls;
        } else if (a == 1.0) {
            ++n_treated;
        } else {
            std::ostringstream os;
            os << "row " << i << ": treatment not in {0,1}";
            report.push_back(os.str());
        }
        const double y = draft.outcome[i];
        if (!is_finite(y)) {
            std::ostringstream os;
            os << "row " << i << ": non-finite outcome";
            report.push_back(os.str());
        } else if (draft.outcome_kind == OutcomeKind::binary && y != 0.0 &&
                   y != 1.0) {
            std::ostringstream os;
            os << "row " << i << ": binary outcome not in {0,1}";
            report.push_back(os.str());
        }
        for (std::size_t j = 0; j < p; ++j) {
            if (!is_finite(draft.covariates[i * p + j])) {
                std::ostringstream os;
                os << "row " << i << ": non-finite value in covariate '"
                   << draft.covariate_names[j] << "'";
                report.push_back(os.str());
            }
        }
        if (draft.provided_ps) {
            const double e = (*draft.provided_ps)[i];
            if (!is_finite(e) || e <= 0.0 || e >= 1.0) {
                std::ostringstream os;
                os << "row " << i
                   << ": provided PS must be in open interval (0,1)";
                report.push_back(os.str());
            }
        }
    }
    if (n_treated == 0) report.push_back("no treated units");
    if (n_controls == 0) report.push_back("no control units");

    for (std::size_t j = 0; j < p; ++j) {
        if (draft.covariate_names[j].empty())
            report.push_back("covariate names are mandatory");
        for (std::size_t k = j + 1; k < p; ++k) {
            if (draft.covariate_names[j] == draft.covariate_names[k]) {
                report.push_back("duplicate covariate name '" +
                                 draft.covariate_names[j] + "'");
            }
        }
    }
    return report;
}

Dataset Dataset::create(DatasetDraft draft) {
    auto report = check(draft);
    if (!report.empty()) {
        std::string msg = "invalid dataset:";
        for (const auto& line : report) msg += "\n  " + line;
        throw DataError(msg);
    }

    Dataset d;
    d.n_ = draft.treatment.size();
    const std::size_t p = draft.covariate_names.size();
    d.treatment_.resize(d.n_);
    for (std::size_t i = 0; i < d.n_; ++i) {
        d.treatment_[i] = draft.treatment[i] == 1.0 ? 1 : 0;
        d.n_treated_ += static_cast<std::size_t>(d.treatment_[i]);
    }
    d.outcome_ = std::move(draft.outcome);
    d.outcome_kind_ = draft.outcome_kind;
    d.covariate_names_ = std::move(draft.covariate_names);
    d.columns_.resize(p * d.n_);
    for (std::size_t i = 0; i < d.n_; ++i)
        for (std::size_t j = 0; j < p; ++j)
            d.columns_[j * d.n_ + i] = draft.covariates[i * p + j];
    d.provided_ps_ = std::move(draft.provided_ps);
    d.unit_ids_ = std::move(draft.unit_ids);
    return d;
}

std::vector<std::string> Dataset::validate() const {
    return check(to_draft());
}

std::size_t Dataset::covariate_index(const std::string& name) const {
    for (std::size_t j = 0; j < covariate_names_.size(); ++j)
        if (covariate_names_[j] == name) return j;
    throw DataError("unknown covariate '" + name + "'");
}

const std::vector<double>& Dataset::provided_ps() const {
    if (!provided_ps_) throw DataError("dataset has no provided PS column");
    return *provided_ps_;
}

DatasetDraft Dataset::to_draft() const {
    DatasetDraft draft;
    const std::size_t p = covariate_names_.size();
    draft.treatment.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
        draft.treatment[i] = static_cast<double>(treatment_[i]);
    draft.outcome = outcome_;
    draft.outcome_kind = outcome_kind_;
    draft.covariate_names = covariate_names_;
    draft.covariates.resize(n_ * p);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < p; ++j)
            draft.covariates[i * p + j] = columns_[j * n_ + i];
    draft.provided_ps = provided_ps_;
    draft.unit_ids = unit_ids_;
    return draft;
}

}  // namespace psw
