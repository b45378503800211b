#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rankmetrics/bibliometric.hpp"
#include "rankmetrics/ranking_metrics.hpp"
#include "rankmetrics/risk_measures.hpp"

namespace rankmetrics {

// Metric key grammar (colon-separated):
//
//   glr
//   omega | omega:zero | omega:inf
//   raroc:<rho>
//   lvar:const:<level> | lvar:two_step:<lo>:<hi>[:<threshold>]
//   ce:id | ce:plinear:<theta>:<m>        theta may carry a 'q' suffix,
//                                         e.g. 0.75q = per-position quantile
//   family:shift:<rho> | family:raroc:<rho>
//   h | h2 | halpha:<alpha> | w           (profile-based indices)
//
//   <rho> := cvar:<alpha> | cvar_t:<alpha> | var:<alpha> | evar:<p>
//
// A two-step lambda without an explicit threshold takes it from the pooled
// returns of all entities being ranked: the quantile at (lo+hi)/2.

struct MetricSpec {
    enum class Kind { dist, biblio };

    Kind kind = Kind::dist;
    std::string key;
    bool needs_pooled_context = false;
    /// Builds the metric; `pooled` may be null when no context is needed.
    std::function<RankingMetric(const ScenarioDist* pooled)> make;
    std::optional<PerfCurveFamily> family;
};

namespace detail {

inline std::vector<std::string> split_key(const std::string& key) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        const auto pos = key.find(':', begin);
        if (pos == std::string::npos) {
            parts.push_back(key.substr(begin));
            break;
        }
        parts.push_back(key.substr(begin, pos - begin));
        begin = pos + 1;
    }
    return parts;
}

inline double parse_number(const std::string& token, const std::string& key) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("metric key '" + key + "': bad number '" + token + "'");
    }
    return value;
}

struct RhoSpec {
    RiskFunctional rho;
    bool monotone = false;
    bool convex = false;
    bool positively_homogeneous = false;
    bool cash_additive = false;
    bool defined_at_constants = true;
};

inline RhoSpec parse_rho(const std::vector<std::string>& parts, std::size_t offset,
                         const std::string& key) {
    if (parts.size() != offset + 2) {
        throw std::invalid_argument("metric key '" + key + "': expected <rho-kind>:<level>");
    }
    const std::string& kind = parts[offset];
    const double level = parse_number(parts[offset + 1], key);
    RhoSpec spec;
    if (kind == "cvar") {
        if (!(level > 0.0 && level < 1.0)) {
            throw std::invalid_argument("metric key '" + key + "': alpha must be in (0,1)");
        }
        spec.rho = [level](const ScenarioDist& d) { return cvar_historical(d, level); };
        spec.monotone = spec.convex = spec.positively_homogeneous = spec.cash_additive = true;
    } else if (kind == "var") {
        if (!(level > 0.0 && level < 1.0)) {
            throw std::invalid_argument("metric key '" + key + "': alpha must be in (0,1)");
        }
        spec.rho = [level](const ScenarioDist& d) { return var(d, level); };
        spec.monotone = spec.positively_homogeneous = spec.cash_additive = true;
    } else if (kind == "evar") {
        if (!(level > 0.0 && level < 1.0)) {
            throw std::invalid_argument("metric key '" + key + "': p must be in (0,1)");
        }
        spec.rho = [level](const ScenarioDist& d) { return evar_expectile(d, level); };
        spec.monotone = spec.positively_homogeneous = spec.cash_additive = true;
        spec.convex = level <= 0.5;
    } else if (kind == "cvar_t") {
        if (!(level > 0.0 && level < 1.0)) {
            throw std::invalid_argument("metric key '" + key + "': alpha must be in (0,1)");
        }
        spec.rho = [level](const ScenarioDist& d) { return cvar_student_t(d, level).value; };
        spec.positively_homogeneous = spec.cash_additive = true;
        spec.defined_at_constants = false;  // the moment fit rejects degenerate samples
    } else {
        throw std::invalid_argument("metric key '" + key + "': unknown risk '" + kind + "'");
    }
    return spec;
}

}  // namespace detail

inline MetricSpec parse_metric_key(const std::string& key) {
    const auto parts = detail::split_key(key);
    MetricSpec spec;
    spec.key = key;
    const std::string& head = parts.front();

    if (head == "glr" && parts.size() == 1) {
        spec.make = [](const ScenarioDist*) { return make_glr(); };
        return spec;
    }
    if (head == "omega") {
        OmegaNormalization mode = OmegaNormalization::infinity;
        if (parts.size() == 2 && parts[1] == "zero") {
            mode = OmegaNormalization::zero;
        } else if (parts.size() == 2 && parts[1] == "inf") {
            mode = OmegaNormalization::infinity;
        } else if (parts.size() != 1) {
            throw std::invalid_argument("metric key '" + key + "': expected omega[:zero|:inf]");
        }
        spec.make = [mode](const ScenarioDist*) { return make_omega(mode); };
        return spec;
    }
    if (head == "raroc") {
        auto rho = detail::parse_rho(parts, 1, key);
        spec.make = [key, rho](const ScenarioDist*) {
            if (rho.monotone && rho.defined_at_constants) {
                return make_raroc(key, rho.rho, rho.convex, rho.positively_homogeneous);
            }
            // no axiom claims for risks outside the coherent setting
            RankingMetric m;
            m.name = key;
            m.evaluate = [rho](const ScenarioDist& d) { return raroc_value(d, rho.rho); };
            m.traits = {.monotone = false,
                        .cash_quasiconcave = false,
                        .quasiconcave = false,
                        .cash_subadditive = false,
                        .cash_additive_on_support = false,
                        .scale_invariant = rho.positively_homogeneous};
            return m;
        };
        return spec;
    }
    if (head == "lvar") {
        if (parts.size() == 3 && parts[1] == "const") {
            const double level = detail::parse_number(parts[2], key);
            spec.make = [key, level](const ScenarioDist*) {
                return make_lambda_var_metric(key, LambdaFn::constant(level));
            };
            return spec;
        }
        if ((parts.size() == 4 || parts.size() == 5) && parts[1] == "two_step") {
            const double lo = detail::parse_number(parts[2], key);
            const double hi = detail::parse_number(parts[3], key);
            if (parts.size() == 5) {
                const double threshold = detail::parse_number(parts[4], key);
                spec.make = [key, lo, hi, threshold](const ScenarioDist*) {
                    return make_lambda_var_metric(key, LambdaFn::two_step(lo, hi, threshold));
                };
                return spec;
            }
            spec.needs_pooled_context = true;
            spec.make = [key, lo, hi](const ScenarioDist* pooled) {
                if (pooled == nullptr) {
                    throw std::invalid_argument(
                        "metric key '" + key +
                        "': pooled returns required to place the two-step threshold; "
                        "append an explicit threshold as lvar:two_step:lo:hi:<x>");
                }
                const double tau = 0.5 * (lo + hi);
                const double threshold = quantile(*pooled, tau);
                return make_lambda_var_metric(key, LambdaFn::two_step(lo, hi, threshold));
            };
            return spec;
        }
        throw std::invalid_argument("metric key '" + key +
                                    "': expected lvar:const:<v> or lvar:two_step:<lo>:<hi>[:<x>]");
    }
    if (head == "ce") {
        if (parts.size() == 2 && parts[1] == "id") {
            spec.make = [key](const ScenarioDist*) {
                return make_certainty_equiv_metric(key, UtilityFn::identity());
            };
            return spec;
        }
        if (parts.size() == 4 && parts[1] == "plinear") {
            const std::string& theta_token = parts[2];
            const double m = detail::parse_number(parts[3], key);
            if (!theta_token.empty() && theta_token.back() == 'q') {
                const double pct = detail::parse_number(
                    theta_token.substr(0, theta_token.size() - 1), key);
                if (!(pct > 0.0 && pct < 1.0)) {
                    throw std::invalid_argument("metric key '" + key +
                                                "': quantile threshold must be in (0,1)");
                }
                spec.make = [key, pct, m](const ScenarioDist*) {
                    RankingMetric metric;
                    metric.name = key;
                    // threshold adapts to the evaluated position, so no
                    // axiom properties are claimed
                    metric.evaluate = [pct, m](const ScenarioDist& d) {
                        const double theta = quantile(d, pct);
                        return r_certainty_equiv_value(d,
                                                       UtilityFn::piecewise_linear(theta, m));
                    };
                    metric.traits = {};
                    return metric;
                };
                return spec;
            }
            const double theta = detail::parse_number(theta_token, key);
            spec.make = [key, theta, m](const ScenarioDist*) {
                return make_certainty_equiv_metric(key, UtilityFn::piecewise_linear(theta, m));
            };
            return spec;
        }
        throw std::invalid_argument("metric key '" + key +
                                    "': expected ce:id or ce:plinear:<theta>:<m>");
    }
    if (head == "family") {
        if (parts.size() >= 2 && parts[1] == "shift") {
            auto rho = detail::parse_rho(parts, 2, key);
            spec.make = [key, rho](const ScenarioDist*) {
                return make_family_metric(
                    key, shift_family(key, rho.rho), FamilyOptions{},
                    MetricTraits{.monotone = rho.monotone,
                                 .cash_quasiconcave = rho.monotone && rho.defined_at_constants,
                                 .quasiconcave = false,
                                 .cash_subadditive = rho.cash_additive,
                                 .cash_additive_on_support = rho.cash_additive,
                                 .scale_invariant = false});
            };
            return spec;
        }
        if (parts.size() >= 2 && parts[1] == "raroc") {
            auto rho = detail::parse_rho(parts, 2, key);
            spec.make = [key, rho](const ScenarioDist*) {
                return make_family_metric(
                    key, mean_risk_ratio_family(key, rho.rho), FamilyOptions{},
                    MetricTraits{.monotone = rho.monotone,
                                 .cash_quasiconcave = rho.monotone && rho.defined_at_constants,
                                 .quasiconcave = false,
                                 .cash_subadditive = false,
                                 .cash_additive_on_support = false,
                                 .scale_invariant = rho.positively_homogeneous});
            };
            return spec;
        }
        throw std::invalid_argument("metric key '" + key +
                                    "': expected family:shift:<rho> or family:raroc:<rho>");
    }

    // profile-based indices
    if (head == "h" && parts.size() == 1) {
        spec.kind = MetricSpec::Kind::biblio;
        spec.family = PerfCurveFamily::h();
        return spec;
    }
    if (head == "h2" && parts.size() == 1) {
        spec.kind = MetricSpec::Kind::biblio;
        spec.family = PerfCurveFamily::h2();
        return spec;
    }
    if (head == "halpha" && parts.size() == 2) {
        const double alpha = detail::parse_number(parts[1], key);
        spec.kind = MetricSpec::Kind::biblio;
        spec.family = PerfCurveFamily::h_alpha(alpha);
        return spec;
    }
    if (head == "w" && parts.size() == 1) {
        spec.kind = MetricSpec::Kind::biblio;
        spec.family = PerfCurveFamily::w();
        return spec;
    }

    throw std::invalid_argument("unknown metric key '" + key + "'");
}

inline std::vector<MetricSpec> parse_metric_keys(const std::vector<std::string>& keys) {
    std::vector<MetricSpec> specs;
    specs.reserve(keys.size());
    for (const auto& key : keys) specs.push_back(parse_metric_key(key));
    return specs;
}

}  // namespace rankmetrics
