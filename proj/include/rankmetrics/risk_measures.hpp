#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "rankmetrics/lambda_fn.hpp"
#include "rankmetrics/scenario_dist.hpp"
#include "rankmetrics/utility_fn.hpp"

namespace rankmetrics {

using RiskFunctional = std::function<double(const ScenarioDist&)>;

/// VaR_alpha(X) = -quantile(X, alpha).
inline double var(const ScenarioDist& d, double alpha) {
    return -quantile(d, alpha);
}

/// Historical CVaR. For equal-weight samples this is the negative mean of
/// the worst ceil(alpha*n) outcomes; for general weights the lower-alpha
/// tail is averaged with fractional inclusion of the boundary atom.
inline double cvar_historical(const ScenarioDist& d, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("cvar_historical: alpha must be in (0, 1)");
    }
    if (d.is_equal_weight()) {
        const std::size_t n = d.size();
        std::size_t m = static_cast<std::size_t>(
            std::ceil(alpha * static_cast<double>(n) - 1e-9));
        m = std::min(std::max<std::size_t>(m, 1), n);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += d.outcomes()[i];
        return -s / static_cast<double>(m);
    }
    double remaining = alpha;
    double s = 0.0;
    for (std::size_t i = 0; i < d.size() && remaining > 0.0; ++i) {
        const double take = std::min(d.probabilities()[i], remaining);
        s += take * d.outcomes()[i];
        remaining -= take;
    }
    return -s / alpha;
}

// ---------------------------------------------------------------------------
// Parametric Student-t CVaR (method-of-moments fit)
// ---------------------------------------------------------------------------

struct StudentTFit {
    double location = 0.0;
    double scale = 1.0;
    double nu = 100.0;
    /// Set when sample kurtosis <= 3 forced the nu = 100 fallback.
    bool kurtosis_fallback = false;
};

/// Moment fit of a location-scale Student-t: nu from kurtosis via
/// nu = 4 + 6/(kurt - 3) clamped to [2.5, 100], scale^2 = s^2 (nu-2)/nu.
inline StudentTFit fit_student_t(const ScenarioDist& d) {
    if (d.size() < 8) {
        throw std::invalid_argument("fit_student_t: need at least 8 scenarios");
    }
    const double mu = expectation(d);
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = d.outcomes()[i] - mu;
        m2 += d.probabilities()[i] * e * e;
        m4 += d.probabilities()[i] * e * e * e * e;
    }
    if (!(m2 > 0.0) || std::sqrt(m2) <= 1e-12 * (1.0 + std::abs(mu))) {
        throw std::invalid_argument("parametric fit undefined");
    }
    const double kurt = m4 / (m2 * m2);
    StudentTFit fit;
    fit.location = mu;
    if (kurt <= 3.0) {
        fit.nu = 100.0;
        fit.kurtosis_fallback = true;
    } else {
        fit.nu = std::clamp(4.0 + 6.0 / (kurt - 3.0), 2.5, 100.0);
    }
    fit.scale = std::sqrt(m2 * (fit.nu - 2.0) / fit.nu);
    return fit;
}

/// Closed-form CVaR of a location-scale Student-t:
///   CVaR_alpha = -loc + scale * (pdf(q)/alpha) * (nu + q^2) / (nu - 1)
/// with q the lower alpha-quantile of the standardized t.
inline double student_t_cvar(double location, double scale, double nu, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("student_t_cvar: alpha must be in (0, 1)");
    }
    if (!(nu > 1.0)) {
        throw std::invalid_argument("student_t_cvar: nu must exceed 1");
    }
    const boost::math::students_t_distribution<double> t(nu);
    const double q = boost::math::quantile(t, alpha);
    const double density = boost::math::pdf(t, q);
    const double tail_mean = (density / alpha) * (nu + q * q) / (nu - 1.0);
    return -location + scale * tail_mean;
}

struct StudentTCvarResult {
    double value = 0.0;
    StudentTFit fit;
};

inline StudentTCvarResult cvar_student_t(const ScenarioDist& d, double alpha) {
    StudentTCvarResult r;
    r.fit = fit_student_t(d);
    r.value = student_t_cvar(r.fit.location, r.fit.scale, r.fit.nu, alpha);
    return r;
}

// ---------------------------------------------------------------------------
// Expectile-based EVaR
// ---------------------------------------------------------------------------

/// EVaR^p(X) = -y* where y* is the unique root of
///   g(y) = p E[(X-y)^+] - (1-p) E[(X-y)^-].
/// g is continuous and strictly decreasing with g(min) >= 0 >= g(max), so
/// bisection on [min outcome, max outcome] converges; absolute tol 1e-10.
inline double evar_expectile(const ScenarioDist& d, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("evar_expectile: p must be in (0, 1)");
    }
    const auto g = [&](double y) {
        double pos = 0.0;
        double neg = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double e = d.outcomes()[i] - y;
            if (e >= 0.0) {
                pos += d.probabilities()[i] * e;
            } else {
                neg -= d.probabilities()[i] * e;
            }
        }
        return p * pos - (1.0 - p) * neg;
    };
    double lo = d.min_outcome();
    double hi = d.max_outcome();
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return -0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Lambda-quantile / LambdaVaR
// ---------------------------------------------------------------------------

/// q_Lambda(X) = inf{y : P(X <= y) > Lambda(y)}.
///
/// Both the empirical CDF and Lambda are step functions, so the infimum is
/// exact on the merged lattice of outcomes and Lambda breakpoints: at each
/// candidate y the inequality is tested at y itself and on the open
/// interval just right of y (where the CDF keeps the value F(y) and Lambda
/// its right limit). Returns nullopt when no point qualifies, which can
/// happen only when Lambda reaches 1 on and beyond the support.
inline std::optional<double> lambda_quantile(const ScenarioDist& d, const LambdaFn& lam) {
    std::vector<double> candidates = d.outcomes();
    candidates.insert(candidates.end(), lam.breakpoints().begin(), lam.breakpoints().end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double y : candidates) {
        const double f = d.cdf(y);
        if (f > lam.value(y)) return y;
        if (f > lam.value_right(y)) return y;  // infimum approached from the right
    }
    return std::nullopt;
}

/// LambdaVaR(X) = -q_Lambda(X); nullopt when the quantile is undefined.
inline std::optional<double> lambda_var(const ScenarioDist& d, const LambdaFn& lam) {
    const auto q = lambda_quantile(d, lam);
    if (!q) return std::nullopt;
    return -*q;
}

// ---------------------------------------------------------------------------
// Expected loss and certainty equivalents
// ---------------------------------------------------------------------------

/// E[f(-X)] for an increasing convex loss transform f.
inline double expected_loss(const ScenarioDist& d, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += d.probabilities()[i] * f(-d.outcomes()[i]);
    }
    return s;
}

namespace loss_curves {

inline std::function<double(double)> identity() {
    return [](double y) { return y; };
}

/// Put payoff f(y) = (y + strike)^+.
inline std::function<double(double)> put_payoff(double strike) {
    return [strike](double y) { return std::max(y + strike, 0.0); };
}

inline std::function<double(double)> shifted(std::function<double(double)> f, double c) {
    return [f = std::move(f), c](double y) { return f(y) + c; };
}

/// Piecewise-linear table, validated increasing and convex; extrapolated
/// with the end slopes.
inline std::function<double(double)> from_table(std::vector<double> points,
                                                std::vector<double> values) {
    if (points.size() < 2 || points.size() != values.size()) {
        throw std::invalid_argument("loss curve table needs >= 2 aligned knots");
    }
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dx = points[i] - points[i - 1];
        const double dv = values[i] - values[i - 1];
        if (!(dx > 0.0) || !(dv > 0.0)) {
            throw std::invalid_argument("loss curve table must be strictly increasing");
        }
        const double slope = dv / dx;
        if (slope < prev_slope - 1e-12) {
            throw std::invalid_argument("loss curve table must be convex");
        }
        prev_slope = std::max(prev_slope, slope);
    }
    return [xs = std::move(points), vs = std::move(values)](double y) {
        const std::size_t n = xs.size();
        if (y <= xs.front()) {
            const double s = (vs[1] - vs[0]) / (xs[1] - xs[0]);
            return vs.front() + s * (y - xs.front());
        }
        if (y >= xs.back()) {
            const double s = (vs[n - 1] - vs[n - 2]) / (xs[n - 1] - xs[n - 2]);
            return vs.back() + s * (y - xs.back());
        }
        auto it = std::lower_bound(xs.begin(), xs.end(), y);
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double t = (y - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return vs[j - 1] + t * (vs[j] - vs[j - 1]);
    };
}

}  // namespace loss_curves

/// Certainty-equivalent risk measure -u^{-1}(E[u(X)]).
inline double certainty_equiv_rho(const ScenarioDist& d, const UtilityFn& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += d.probabilities()[i] * u.value(d.outcomes()[i]);
    }
    return -u.inverse(s);
}

// ---------------------------------------------------------------------------
// Level-indexed risk families
// ---------------------------------------------------------------------------

/// An indexed family x -> rho_x, declared nondecreasing in the level x.
/// The certificate is a declaration; it is verified empirically by the
/// property harness, and the sup-representation engine rejects families
/// caught decreasing across its bisection bracket.
struct RiskFamily {
    std::string name;
    std::function<double(double level, const ScenarioDist&)> evaluate;
    bool monotone_certificate = true;
};

/// rho_x = rho + x.
inline RiskFamily shift_family(std::string name, RiskFunctional rho) {
    RiskFamily fam;
    fam.name = std::move(name);
    fam.evaluate = [rho = std::move(rho)](double x, const ScenarioDist& d) {
        return rho(d) + x;
    };
    return fam;
}

/// rho_x = -E[X] + x * rho(X); generates reward-to-risk ratios.
inline RiskFamily mean_risk_ratio_family(std::string name, RiskFunctional rho) {
    RiskFamily fam;
    fam.name = std::move(name);
    fam.evaluate = [rho = std::move(rho)](double x, const ScenarioDist& d) {
        return -expectation(d) + x * rho(d);
    };
    return fam;
}

/// rho_x = EVaR^{p(x)} for a level-to-exponent schedule p, which must be
/// nonincreasing in x for the family to be increasing.
inline RiskFamily expectile_exponent_family(std::string name,
                                            std::function<double(double)> schedule) {
    RiskFamily fam;
    fam.name = std::move(name);
    fam.evaluate = [schedule = std::move(schedule)](double x, const ScenarioDist& d) {
        return evar_expectile(d, schedule(x));
    };
    return fam;
}

/// rho_x = LambdaVaR with a level-indexed Lambda^x; an undefined quantile
/// maps to +infinity (never acceptable at that level).
inline RiskFamily lambda_level_family(std::string name,
                                      std::function<LambdaFn(double)> lambda_at_level) {
    RiskFamily fam;
    fam.name = std::move(name);
    fam.evaluate = [make = std::move(lambda_at_level)](double x, const ScenarioDist& d) {
        const auto v = lambda_var(d, make(x));
        return v ? *v : std::numeric_limits<double>::infinity();
    };
    return fam;
}

}  // namespace rankmetrics
