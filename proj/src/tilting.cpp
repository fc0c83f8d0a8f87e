#include "psw/tilting.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace psw {

namespace {

// N(0, eps^2) CDF
double phi_eps(double t, double eps) {
    return 0.5 * std::erfc(-t / (eps * std::numbers::sqrt2));
}

[[noreturn]] void missing_param(const char* scheme, const char* param) {
    throw std::invalid_argument(std::string(scheme) + " scheme requires " +
                                param);
}

void check_e(double e) {
    if (!(e > 0.0 && e < 1.0))
        throw std::invalid_argument(
            "propensity score must be in open interval (0,1)");
}

double require_alpha(const WeightScheme& s, const char* name) {
    if (!s.params.alpha) missing_param(name, "alpha");
    return *s.params.alpha;
}

double smooth_eps(const WeightScheme& s) {
    return s.params.epsilon.value_or(0.01);
}

// Schemes sharing one tilting expression across all three classes.
double common_tilt(const WeightScheme& s, double e) {
    switch (s.scheme) {
        case Scheme::mw:
            return std::min(e, 1.0 - e);
        case Scheme::ow:
            return e * (1.0 - e);
        case Scheme::ew:
            return -e * std::log(e / (1.0 - e)) - std::log(1.0 - e);
        case Scheme::bw: {
            if (!s.params.nu1 || !s.params.nu2) missing_param("bw", "nu1/nu2");
            return std::pow(e, *s.params.nu1 - 1.0) *
                   std::pow(1.0 - e, *s.params.nu2 - 1.0);
        }
        default:
            throw std::invalid_argument("scheme has no shared tilting form");
    }
}

std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

double h_wate(const WeightScheme& s, double e) {
    check_e(e);
    switch (s.scheme) {
        case Scheme::ipw:
            return 1.0;
        case Scheme::ipw_treated:
            return e;
        case Scheme::ipw_controls:
            return 1.0 - e;
        case Scheme::trim: {
            const double a = require_alpha(s, "trim");
            return (a < e && e < 1.0 - a) ? 1.0 : 0.0;
        }
        case Scheme::smooth_trim: {
            const double a = require_alpha(s, "smoothtrim");
            const double eps = smooth_eps(s);
            return phi_eps(e - a, eps) * phi_eps(1.0 - a - e, eps);
        }
        case Scheme::trunc: {
            const double a = require_alpha(s, "trunc");
            if (e <= a) return e / a;
            if (e >= 1.0 - a) return (1.0 - e) / (1.0 - a);
            return 1.0;
        }
        case Scheme::tw: {
            if (!s.params.K) missing_param("tw", "K");
            return std::min(1.0, *s.params.K * std::min(e, 1.0 - e));
        }
        default:
            return common_tilt(s, e);
    }
}

double g_watt(const WeightScheme& s, double e) {
    check_e(e);
    switch (s.scheme) {
        case Scheme::ipw:
            return 1.0;
        case Scheme::trim: {
            const double a = require_alpha(s, "trim");
            return e < 1.0 - a ? 1.0 : 0.0;
        }
        case Scheme::smooth_trim: {
            const double a = require_alpha(s, "smoothtrim");
            return phi_eps(1.0 - a - e, smooth_eps(s));
        }
        case Scheme::trunc: {
            const double a = require_alpha(s, "trunc");
            if (e >= 1.0 - a) return (1.0 - e) * a / ((1.0 - a) * e);
            return 1.0;
        }
        default:
            return common_tilt(s, e);
    }
}

double g_watc(const WeightScheme& s, double e) {
    check_e(e);
    switch (s.scheme) {
        case Scheme::ipw:
            return 1.0;
        case Scheme::trim: {
            const double a = require_alpha(s, "trim");
            return e > a ? 1.0 : 0.0;
        }
        case Scheme::smooth_trim: {
            const double a = require_alpha(s, "smoothtrim");
            return phi_eps(e - a, smooth_eps(s));
        }
        case Scheme::trunc: {
            const double a = require_alpha(s, "trunc");
            if (e <= a) return e * (1.0 - a) / (a * (1.0 - e));
            return 1.0;
        }
        default:
            return common_tilt(s, e);
    }
}

double tilt(const WeightScheme& s, double e) {
    switch (s.estimand_class) {
        case EstimandClass::wate:
            return h_wate(s, e);
        case EstimandClass::watt:
            return g_watt(s, e);
        case EstimandClass::watc:
            return g_watc(s, e);
    }
    throw std::invalid_argument("unknown estimand class");
}

std::vector<double> unit_weights(const WeightScheme& s,
                                 std::span<const double> e,
                                 std::span<const int> a) {
    if (e.size() != a.size())
        throw std::invalid_argument("ps and treatment lengths differ");
    std::vector<double> w(e.size());
    switch (s.estimand_class) {
        case EstimandClass::wate:
            for (std::size_t i = 0; i < e.size(); ++i) {
                const double h = h_wate(s, e[i]);
                w[i] = a[i] ? h / e[i] : h / (1.0 - e[i]);
            }
            break;
        case EstimandClass::watt:
            for (std::size_t i = 0; i < e.size(); ++i) {
                w[i] = a[i] ? 1.0
                            : g_watt(s, e[i]) * e[i] / (1.0 - e[i]);
            }
            break;
        case EstimandClass::watc:
            for (std::size_t i = 0; i < e.size(); ++i) {
                w[i] = a[i] ? g_watc(s, e[i]) * (1.0 - e[i]) / e[i]
                            : 1.0;
            }
            break;
    }
    return w;
}

WeightScheme WeightScheme::unchecked(EstimandClass cls, Scheme s,
                                     SchemeParams p) {
    WeightScheme ws;
    ws.estimand_class = cls;
    ws.scheme = s;
    ws.params = p;
    return ws;
}

WeightScheme WeightScheme::make(EstimandClass cls, Scheme s, SchemeParams p) {
    const bool wate = cls == EstimandClass::wate;
    switch (s) {
        case Scheme::ipw_treated:
        case Scheme::ipw_controls:
            if (!wate)
                throw std::invalid_argument(
                    "treated/controls schemes are only defined for the wate "
                    "class; use scheme ipw within watt/watc");
            break;
        case Scheme::trim:
        case Scheme::trunc:
        case Scheme::smooth_trim: {
            if (!p.alpha)
                throw std::invalid_argument(
                    "trim/smoothtrim/trunc require alpha");
            if (!(*p.alpha > 0.0 && *p.alpha < 0.5))
                throw std::invalid_argument("alpha must be in (0, 0.5)");
            if (s == Scheme::smooth_trim) {
                if (!p.epsilon) p.epsilon = 0.01;
                if (!(*p.epsilon > 0.0))
                    throw std::invalid_argument("epsilon must be > 0");
            }
            break;
        }
        case Scheme::tw:
            if (!wate)
                throw std::invalid_argument(
                    "tw scheme is only defined for the wate class");
            if (!p.K) throw std::invalid_argument("tw requires K");
            if (!(*p.K > 1.0))
                throw std::invalid_argument("tw requires K > 1");
            break;
        case Scheme::bw:
            if (!p.nu1 || !p.nu2)
                throw std::invalid_argument("bw requires nu1 and nu2");
            if (!(*p.nu1 >= 2.0 && *p.nu2 >= 2.0))
                throw std::invalid_argument("bw requires nu1, nu2 >= 2");
            break;
        case Scheme::ipw:
        case Scheme::mw:
        case Scheme::ow:
        case Scheme::ew:
            break;
    }
    return unchecked(cls, s, p);
}

std::string scheme_token(const WeightScheme& s) {
    switch (s.scheme) {
        case Scheme::ipw:
            return "ipw";
        case Scheme::ipw_treated:
            return "treated";
        case Scheme::ipw_controls:
            return "controls";
        case Scheme::trim:
            return "trim:" + format_num(s.params.alpha.value_or(0));
        case Scheme::smooth_trim:
            return "smoothtrim:" + format_num(s.params.alpha.value_or(0)) +
                   ":" + format_num(s.params.epsilon.value_or(0.01));
        case Scheme::trunc:
            return "trunc:" + format_num(s.params.alpha.value_or(0));
        case Scheme::mw:
            return "mw";
        case Scheme::tw:
            return "tw:" + format_num(s.params.K.value_or(0));
        case Scheme::ow:
            return "ow";
        case Scheme::ew:
            return "ew";
        case Scheme::bw: {
            const double n1 = s.params.nu1.value_or(0);
            const double n2 = s.params.nu2.value_or(0);
            if (n1 == n2) return "bw:" + format_num(n1);
            return "bw:" + format_num(n1) + ":" + format_num(n2);
        }
    }
    throw std::invalid_argument("unknown scheme");
}

std::string scheme_label(const WeightScheme& s) {
    switch (s.scheme) {
        case Scheme::ipw:
            return "overall";
        case Scheme::ipw_treated:
            return "treated";
        case Scheme::ipw_controls:
            return "control";
        case Scheme::trim:
            return "trimming (alpha=" + format_num(*s.params.alpha) + ")";
        case Scheme::smooth_trim:
            return "smooth trimming (alpha=" + format_num(*s.params.alpha) +
                   ", eps=" + format_num(s.params.epsilon.value_or(0.01)) +
                   ")";
        case Scheme::trunc:
            return "truncation (alpha=" + format_num(*s.params.alpha) + ")";
        case Scheme::mw:
            return "matching";
        case Scheme::tw:
            return "trapezoidal (K=" + format_num(*s.params.K) + ")";
        case Scheme::ow:
            return "overlap";
        case Scheme::ew:
            return "entropy";
        case Scheme::bw: {
            const double n1 = *s.params.nu1;
            const double n2 = *s.params.nu2;
            if (n1 == n2) return "beta (v=" + format_num(n1) + ")";
            return "beta (v1=" + format_num(n1) + ",v2=" + format_num(n2) +
                   ")";
        }
    }
    throw std::invalid_argument("unknown scheme");
}

WeightScheme parse_scheme_token(EstimandClass cls, std::string_view token) {
    std::vector<std::string> parts;
    std::string current;
    for (const char c : token) {
        if (c == ':') {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);

    auto num = [&](std::size_t i) -> double {
        try {
            std::size_t pos = 0;
            const double v = std::stod(parts.at(i), &pos);
            if (pos != parts[i].size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid parameter in scheme token '" +
                                        std::string(token) + "'");
        }
    };
    auto expect_arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() - 1 < lo || parts.size() - 1 > hi)
            throw std::invalid_argument("wrong parameter count in scheme "
                                        "token '" +
                                        std::string(token) + "'");
    };

    const std::string& name = parts[0];
    SchemeParams p;
    if (name == "ipw") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::ipw);
    }
    if (name == "treated") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::ipw_treated);
    }
    if (name == "controls") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::ipw_controls);
    }
    if (name == "mw") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::mw);
    }
    if (name == "ow") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::ow);
    }
    if (name == "ew") {
        expect_arity(0, 0);
        return WeightScheme::make(cls, Scheme::ew);
    }
    if (name == "trim" || name == "trunc") {
        expect_arity(1, 1);
        p.alpha = num(1);
        return WeightScheme::make(
            cls, name == "trim" ? Scheme::trim : Scheme::trunc, p);
    }
    if (name == "smoothtrim") {
        expect_arity(1, 2);
        p.alpha = num(1);
        if (parts.size() == 3) p.epsilon = num(2);
        return WeightScheme::make(cls, Scheme::smooth_trim, p);
    }
    if (name == "tw") {
        expect_arity(1, 1);
        p.K = num(1);
        return WeightScheme::make(cls, Scheme::tw, p);
    }
    if (name == "bw") {
        expect_arity(1, 2);
        p.nu1 = num(1);
        p.nu2 = parts.size() == 3 ? num(2) : num(1);
        return WeightScheme::make(cls, Scheme::bw, p);
    }
    throw std::invalid_argument("unknown scheme token '" + std::string(token) +
                                "'");
}

std::string to_string(EstimandClass cls) {
    switch (cls) {
        case EstimandClass::wate:
            return "wate";
        case EstimandClass::watt:
            return "watt";
        case EstimandClass::watc:
            return "watc";
    }
    throw std::invalid_argument("unknown estimand class");
}

EstimandClass parse_estimand_class(std::string_view text) {
    if (text == "wate") return EstimandClass::wate;
    if (text == "watt") return EstimandClass::watt;
    if (text == "watc") return EstimandClass::watc;
    throw std::invalid_argument("unknown estimand class '" +
                                std::string(text) + "'");
}

}  // namespace psw
