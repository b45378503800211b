#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "rankmetrics/risk_measures.hpp"
#include "rankmetrics/scenario_dist.hpp"

namespace rankmetrics {

/// Which branch of a metric's defining case split produced the value.
namespace branch {
inline constexpr const char* none = "";
inline constexpr const char* ratio = "ratio";
inline constexpr const char* nonpositive_mean = "mean <= 0";
inline constexpr const char* nonpositive_risk = "risk <= 0";
inline constexpr const char* zero_denominator = "zero denominator";
inline constexpr const char* positive_level = "positive level";
inline constexpr const char* truncated = "truncated at zero";
inline constexpr const char* undefined_quantile = "undefined lambda quantile";
inline constexpr const char* no_feasible_level = "no feasible level";
inline constexpr const char* right_censored = "right-censored at bracket max";
inline constexpr const char* bisection = "bisection";
}  // namespace branch

/// Extended nonnegative real with the provenance of the branch that fired.
struct MetricValue {
    double value = 0.0;
    const char* provenance = branch::none;

    bool is_infinite() const { return std::isinf(value); }
};

inline MetricValue infinite_metric(const char* provenance) {
    return {std::numeric_limits<double>::infinity(), provenance};
}

/// Properties a metric declares about itself; the property harness decides
/// from these which suites must pass and which run in falsification mode.
struct MetricTraits {
    bool monotone = false;
    bool cash_quasiconcave = false;
    bool quasiconcave = false;
    bool cash_subadditive = false;
    bool cash_additive_on_support = false;
    bool scale_invariant = false;
};

struct RankingMetric {
    std::string name;
    std::function<MetricValue(const ScenarioDist&)> evaluate;
    MetricTraits traits;

    MetricValue operator()(const ScenarioDist& d) const { return evaluate(d); }
};

// ---------------------------------------------------------------------------
// Classical ratios
// ---------------------------------------------------------------------------

/// Gain-loss ratio: E[X]/E[X^-] when E[X] > 0, else 0. A positive mean
/// with zero downside yields +infinity, consistent with the RAROC branch
/// for nonpositive risk.
inline MetricValue glr_value(const ScenarioDist& d) {
    const double mean = expectation(d);
    if (!(mean > 0.0)) return {0.0, branch::nonpositive_mean};
    const double neg = neg_part_expectation(d);
    if (neg == 0.0) return infinite_metric(branch::zero_denominator);
    return {mean / neg, branch::ratio};
}

enum class OmegaNormalization { zero, infinity };

/// Omega ratio E[X^+]/E[X^-]; the normalization mode decides the value when
/// E[X^-] = 0.
inline MetricValue omega_value(const ScenarioDist& d,
                               OmegaNormalization mode = OmegaNormalization::infinity) {
    const double neg = neg_part_expectation(d);
    if (neg == 0.0) {
        return mode == OmegaNormalization::infinity
                   ? infinite_metric(branch::zero_denominator)
                   : MetricValue{0.0, branch::zero_denominator};
    }
    return {pos_part_expectation(d) / neg, branch::ratio};
}

/// RAROC with its three-branch case split.
inline MetricValue raroc_value(const ScenarioDist& d, const RiskFunctional& rho) {
    const double risk = rho(d);
    if (risk <= 0.0) return infinite_metric(branch::nonpositive_risk);
    const double mean = expectation(d);
    if (!(mean > 0.0)) return {0.0, branch::nonpositive_mean};
    return {mean / risk, branch::ratio};
}

/// sup{0, q_Lambda(X)}; an undefined quantile maps to 0 with its own
/// provenance so callers (notably the optimizer) can tell it apart.
inline MetricValue r_lambda_var_value(const ScenarioDist& d, const LambdaFn& lam) {
    const auto q = lambda_quantile(d, lam);
    if (!q) return {0.0, branch::undefined_quantile};
    if (*q <= 0.0) return {0.0, branch::truncated};
    return {*q, branch::positive_level};
}

/// sup{0, u^{-1}(E[u(X)])}.
inline MetricValue r_certainty_equiv_value(const ScenarioDist& d, const UtilityFn& u) {
    const double ce = -certainty_equiv_rho(d, u);
    if (ce <= 0.0) return {0.0, branch::truncated};
    return {ce, branch::positive_level};
}

// ---------------------------------------------------------------------------
// Generic sup-over-risk-family representation engine
// ---------------------------------------------------------------------------

struct FamilyOptions {
    double bracket_max = 1e6;
    double tol = 1e-8;
};

/// r(X) = sup{x > 0 : rho_x(X) <= 0} for a nondecreasing level family.
///
/// Returns 0 when rho_tol > 0, the censored bracket maximum when even
/// rho_bracket_max <= 0, and otherwise bisects to a level x* with
/// rho_{x*} <= 0 < rho_{x* + tol}. A family observed to decrease across
/// the bracket by more than 1e-9 is rejected.
inline MetricValue r_from_family(const ScenarioDist& d, const RiskFamily& fam,
                                 FamilyOptions opts = {}) {
    if (!(opts.bracket_max > 0.0) || !(opts.tol > 0.0)) {
        throw std::invalid_argument("r_from_family: bracket_max and tol must be > 0");
    }
    if (!fam.monotone_certificate) {
        throw std::invalid_argument("r_from_family: family lacks a monotone certificate");
    }
    double lo = opts.tol;
    double f_lo = fam.evaluate(lo, d);
    if (f_lo > 0.0) return {0.0, branch::no_feasible_level};
    double hi = opts.bracket_max;
    double f_hi = fam.evaluate(hi, d);
    if (f_hi <= 0.0) return {hi, branch::right_censored};
    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = fam.evaluate(mid, d);
        if (f_mid < f_lo - 1e-9 || f_mid > f_hi + 1e-9) {
            throw std::runtime_error("family not increasing");
        }
        if (f_mid <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return {lo, branch::bisection};
}

/// Membership in the acceptance set A_x = {X : r(X) >= x}.
inline bool acceptance_member(const ScenarioDist& d, double level, const RankingMetric& r) {
    if (!(level > 0.0)) {
        throw std::invalid_argument("acceptance_member: level must be > 0");
    }
    return r.evaluate(d).value >= level;
}

// ---------------------------------------------------------------------------
// Built-in metric constructors with their declared properties
// ---------------------------------------------------------------------------

inline RankingMetric make_glr() {
    RankingMetric m;
    m.name = "glr";
    m.evaluate = [](const ScenarioDist& d) { return glr_value(d); };
    m.traits = {.monotone = true,
                .cash_quasiconcave = true,
                .quasiconcave = true,
                .cash_subadditive = false,
                .cash_additive_on_support = false,
                .scale_invariant = true};
    return m;
}

inline RankingMetric make_omega(OmegaNormalization mode = OmegaNormalization::infinity) {
    RankingMetric m;
    m.name = mode == OmegaNormalization::infinity ? "omega" : "omega:zero";
    m.evaluate = [mode](const ScenarioDist& d) { return omega_value(d, mode); };
    m.traits = {.monotone = true,
                .cash_quasiconcave = true,
                .quasiconcave = false,  // falsifiable; see the property harness
                .cash_subadditive = false,
                .cash_additive_on_support = false,
                .scale_invariant = true};
    return m;
}

/// The caller states whether rho is convex (=> quasiconcave ratio) and
/// positively homogeneous (=> scale-invariant ratio).
inline RankingMetric make_raroc(std::string name, RiskFunctional rho, bool rho_convex,
                                bool rho_positively_homogeneous) {
    RankingMetric m;
    m.name = std::move(name);
    m.evaluate = [rho = std::move(rho)](const ScenarioDist& d) { return raroc_value(d, rho); };
    m.traits = {.monotone = true,
                .cash_quasiconcave = true,
                .quasiconcave = rho_convex,
                .cash_subadditive = false,
                .cash_additive_on_support = false,
                .scale_invariant = rho_positively_homogeneous};
    return m;
}

inline RankingMetric make_lambda_var_metric(std::string name, const LambdaFn& lam) {
    RankingMetric m;
    m.name = std::move(name);
    m.evaluate = [lam](const ScenarioDist& d) { return r_lambda_var_value(d, lam); };
    const bool subadd = lam.is_nonincreasing();
    m.traits = {.monotone = true,
                .cash_quasiconcave = true,
                .quasiconcave = false,
                .cash_subadditive = subadd,
                .cash_additive_on_support = lam.breakpoints().empty(),
                .scale_invariant = false};
    return m;
}

inline RankingMetric make_certainty_equiv_metric(std::string name, const UtilityFn& u) {
    RankingMetric m;
    m.name = std::move(name);
    m.evaluate = [u](const ScenarioDist& d) { return r_certainty_equiv_value(d, u); };
    m.traits = {.monotone = true,
                .cash_quasiconcave = true,
                .quasiconcave = true,
                .cash_subadditive = u.is_identity(),
                .cash_additive_on_support = u.is_identity(),
                .scale_invariant = false};
    return m;
}

inline RankingMetric make_family_metric(std::string name, RiskFamily fam,
                                        FamilyOptions opts = {}, MetricTraits traits = {
                                            .monotone = true,
                                            .cash_quasiconcave = true,
                                            .quasiconcave = false,
                                            .cash_subadditive = false,
                                            .cash_additive_on_support = false,
                                            .scale_invariant = false}) {
    RankingMetric m;
    m.name = std::move(name);
    m.evaluate = [fam = std::move(fam), opts](const ScenarioDist& d) {
        return r_from_family(d, fam, opts);
    };
    m.traits = traits;
    return m;
}

}  // namespace rankmetrics
