#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psw {

enum class OutcomeKind { continuous, binary };

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raw columns as parsed from input, before any validation.
/// `covariates` is row-major with `covariate_names.size()` columns.
struct DatasetDraft {
    std::vector<double> treatment;
    std::vector<double> outcome;
    OutcomeKind outcome_kind = OutcomeKind::continuous;
    std::vector<std::string> covariate_names;
    std::vector<double> covariates;
    std::optional<std::vector<double>> provided_ps;
    std::vector<std::string> unit_ids;  // empty = none
};

/// Immutable observed sample: treatment indicator, outcome, covariate
/// matrix and (optionally) externally supplied propensity scores.
///
/// Construction goes through create(), which rejects any draft violating
/// the invariants (two arms present, finite values, binary outcomes coded
/// 0/1, provided PS strictly inside (0,1), consistent row counts).
class Dataset {
  public:
    static Dataset create(DatasetDraft draft);

    /// All invariant violations in a draft, one human-readable line each,
    /// with row indices where applicable. Empty means valid.
    static std::vector<std::string> check(const DatasetDraft& draft);

    /// Re-check a constructed dataset; always empty by construction.
    std::vector<std::string> validate() const;

    std::size_t n() const { return n_; }
    std::size_t n_covariates() const { return covariate_names_.size(); }
    std::size_t n_treated() const { return n_treated_; }
    std::size_t n_controls() const { return n_ - n_treated_; }

    const std::vector<int>& treatment() const { return treatment_; }
    const std::vector<double>& outcome() const { return outcome_; }
    OutcomeKind outcome_kind() const { return outcome_kind_; }

    const std::vector<std::string>& covariate_names() const {
        return covariate_names_;
    }
    /// Column j as a contiguous span of length n().
    std::span<const double> covariate_column(std::size_t j) const {
        return {columns_.data() + j * n_, n_};
    }
    /// Index of a named covariate; throws DataError if absent.
    std::size_t covariate_index(const std::string& name) const;

    bool has_provided_ps() const { return provided_ps_.has_value(); }
    const std::vector<double>& provided_ps() const;

    const std::vector<std::string>& unit_ids() const { return unit_ids_; }

    /// Row-major draft equivalent to this dataset (CSV round-trips).
    DatasetDraft to_draft() const;

  private:
    Dataset() = default;

    std::size_t n_ = 0;
    std::size_t n_treated_ = 0;
    std::vector<int> treatment_;
    std::vector<double> outcome_;
    OutcomeKind outcome_kind_ = OutcomeKind::continuous;
    std::vector<std::string> covariate_names_;
    std::vector<double> columns_;  // column-major, p * n
    std::optional<std::vector<double>> provided_ps_;
    std::vector<std::string> unit_ids_;
};

}  // namespace psw
