#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psw/dataset.hpp"

namespace psw {

enum class EstimandClass { wate, watt, watc };

enum class Scheme {
    ipw,
    ipw_treated,
    ipw_controls,
    trim,
    smooth_trim,
    trunc,
    mw,
    tw,
    ow,
    ew,
    bw,
};

/// Optional parameters for the parameterized schemes.
struct SchemeParams {
    std::optional<double> alpha;    // trim / smooth_trim / trunc
    std::optional<double> epsilon;  // smooth_trim, defaults to 0.01
    std::optional<double> K;        // tw
    std::optional<double> nu1;      // bw
    std::optional<double> nu2;      // bw
};

/// An estimand class together with a tilting scheme and its parameters.
///
/// make() validates the combination:
///   - trim/smooth_trim/trunc need alpha in (0, 0.5);
///   - smooth_trim needs epsilon > 0 (default 0.01);
///   - tw needs K > 1 and is only defined for the wate class;
///   - bw needs nu1, nu2 >= 2;
///   - ipw_treated / ipw_controls exist only in the wate class.
/// unchecked() skips validation; it exists for tests that probe identities
/// outside the admissible parameter region.
struct WeightScheme {
    EstimandClass estimand_class = EstimandClass::wate;
    Scheme scheme = Scheme::ipw;
    SchemeParams params;

    static WeightScheme make(EstimandClass cls, Scheme s,
                             SchemeParams p = {});
    static WeightScheme unchecked(EstimandClass cls, Scheme s,
                                  SchemeParams p = {});
};

/// Tilting function h(e) for the wate class (one value per scheme row).
double h_wate(const WeightScheme& s, double e);
/// Tilting function g(e) for the watt class.
double g_watt(const WeightScheme& s, double e);
/// Tilting function g(e) for the watc class.
double g_watc(const WeightScheme& s, double e);
/// Dispatch on s.estimand_class.
double tilt(const WeightScheme& s, double e);

/// Per-unit estimator weights.
///   wate: h/e on treated, h/(1-e) on controls;
///   watt: 1 on treated, g*e/(1-e) on controls;
///   watc: g*(1-e)/e on treated, 1 on controls.
std::vector<double> unit_weights(const WeightScheme& s,
                                 std::span<const double> e,
                                 std::span<const int> a);

/// Machine token, e.g. "ow", "trim:0.05", "bw:2:4".
std::string scheme_token(const WeightScheme& s);
/// Display label, e.g. "overall", "trimming (alpha=0.05)", "beta (v=2)".
std::string scheme_label(const WeightScheme& s);
/// Parse "name[:p1[:p2]]" tokens; throws std::invalid_argument on errors.
WeightScheme parse_scheme_token(EstimandClass cls, std::string_view token);

std::string to_string(EstimandClass cls);
EstimandClass parse_estimand_class(std::string_view text);

}  // namespace psw
