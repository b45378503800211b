#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rankmetrics/axiom_lab.hpp"
#include "rankmetrics/bibliometric.hpp"
#include "rankmetrics/ranking_metrics.hpp"
#include "rankmetrics/scenario_dist.hpp"

namespace rankmetrics {

struct PortfolioWeights {
    std::vector<double> weights;

    static PortfolioWeights validated(std::vector<double> w) {
        if (w.empty()) {
            throw std::invalid_argument("PortfolioWeights: empty weight vector");
        }
        double total = 0.0;
        for (double v : w) {
            if (!(v >= 0.0)) throw std::invalid_argument("PortfolioWeights: weights must be >= 0");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-10) {
            throw std::invalid_argument("PortfolioWeights: weights must sum to 1 within 1e-10");
        }
        return {std::move(w)};
    }

    std::size_t size() const { return weights.size(); }
};

/// Equal-weight scenario distribution of rowwise weighted sums.
inline ScenarioDist portfolio_returns(const std::vector<std::vector<double>>& asset_returns,
                                      const PortfolioWeights& w) {
    if (asset_returns.empty()) {
        throw std::invalid_argument("portfolio_returns: empty return matrix");
    }
    std::vector<double> outcomes;
    outcomes.reserve(asset_returns.size());
    for (const auto& row : asset_returns) {
        if (row.size() != w.size()) {
            throw std::invalid_argument("portfolio_returns: row width must match weight count");
        }
        double v = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) v += row[i] * w.weights[i];
        outcomes.push_back(v);
    }
    return ScenarioDist::equal_weights(std::move(outcomes));
}

/// Uniform draw from the unit simplex via normalized exponentials;
/// deterministic per seed.
inline PortfolioWeights random_simplex(std::size_t n, detail::Rng& rng) {
    if (n == 0) throw std::invalid_argument("random_simplex: n must be >= 1");
    if (n == 1) return {{1.0}};
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& v : w) {
        v = rng.exponential();
        total += v;
    }
    for (auto& v : w) v /= total;
    return {std::move(w)};
}

inline PortfolioWeights random_simplex(std::size_t n, std::uint64_t seed) {
    detail::Rng rng(seed);
    return random_simplex(n, rng);
}

struct OptimizerOptions {
    std::size_t n_starts = 1000;
    std::uint64_t seed = 1;
    /// Relative band for tie detection among local optima.
    double tol = 1e-9;
    std::size_t max_iterations = 2000;
    double simplex_tol = 1e-8;
};

struct OptResult {
    PortfolioWeights best_weights;
    MetricValue best_value;
    std::size_t n_starts = 0;
    std::size_t n_converged = 0;
    bool ties_averaged = false;
};

/// Objective evaluated on the simplex; nullopt marks an undefined value
/// (the start is retried from a fresh random point, then dropped).
using SimplexObjective = std::function<std::optional<double>(const PortfolioWeights&)>;

namespace detail {

inline PortfolioWeights softmax_weights(const std::vector<double>& t) {
    // one coordinate pinned to 0 for identifiability
    const std::size_t n = t.size() + 1;
    double peak = 0.0;
    for (double v : t) peak = std::max(peak, v);
    std::vector<double> w(n);
    double total = std::exp(0.0 - peak);
    w[0] = total;
    for (std::size_t i = 1; i < n; ++i) {
        w[i] = std::exp(t[i - 1] - peak);
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return {std::move(w)};
}

struct NmOutcome {
    std::vector<double> point;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
    bool defined = false;
};

/// Nelder-Mead maximization in the unconstrained softmax coordinates.
/// Standard coefficients: reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Any undefined objective value aborts the start.
inline NmOutcome nelder_mead_maximize(const SimplexObjective& objective,
                                      const std::vector<double>& start,
                                      const OptimizerOptions& opts) {
    const std::size_t dim = start.size();
    NmOutcome out;
    bool undefined_seen = false;
    const auto eval = [&](const std::vector<double>& t) {
        const auto v = objective(softmax_weights(t));
        if (!v) {
            undefined_seen = true;
            return -std::numeric_limits<double>::infinity();
        }
        return *v;
    };

    std::vector<std::vector<double>> simplex(dim + 1, start);
    std::vector<double> values(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += 0.5;
    for (std::size_t i = 0; i <= dim; ++i) {
        values[i] = eval(simplex[i]);
        if (undefined_seen) return out;
    }

    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        std::vector<std::size_t> order(dim + 1);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[dim > 0 ? dim - 1 : 0];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (diameter < opts.simplex_tol) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(dim);

        const auto blend = [&](double coeff) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                p[j] = centroid[j] + coeff * (centroid[j] - simplex[worst][j]);
            }
            return p;
        };

        auto reflected = blend(1.0);
        const double f_reflected = eval(reflected);
        if (undefined_seen) return out;

        if (f_reflected > values[best]) {
            auto expanded = blend(2.0);
            const double f_expanded = eval(expanded);
            if (undefined_seen) return out;
            if (f_expanded > f_reflected) {
                simplex[worst] = std::move(expanded);
                values[worst] = f_expanded;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected > values[second_worst]) {
            simplex[worst] = std::move(reflected);
            values[worst] = f_reflected;
            continue;
        }
        auto contracted = blend(-0.5);
        const double f_contracted = eval(contracted);
        if (undefined_seen) return out;
        if (f_contracted > values[worst]) {
            simplex[worst] = std::move(contracted);
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
            if (undefined_seen) return out;
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
        if (values[i] > values[best]) best = i;
    }
    out.point = simplex[best];
    out.value = values[best];
    out.defined = true;
    return out;
}

struct Candidate {
    PortfolioWeights weights;
    double value;
};

}  // namespace detail

/// Multistart derivative-free maximization of an objective over the unit
/// simplex. The n single-asset vertices are always evaluated as extra
/// candidates; local optima within tol*(1+|best|) of the maximum are
/// averaged (the simplex is convex), re-evaluated, and kept only if the
/// averaged point stays inside the band.
inline OptResult maximize_objective(std::size_t n_assets, const SimplexObjective& objective,
                                    const OptimizerOptions& opts) {
    if (n_assets == 0) throw std::invalid_argument("maximize_objective: need >= 1 asset");
    if (opts.n_starts == 0) throw std::invalid_argument("maximize_objective: need >= 1 start");

    OptResult result;
    result.n_starts = opts.n_starts;

    if (n_assets == 1) {
        PortfolioWeights w{{1.0}};
        const auto v = objective(w);
        result.best_weights = w;
        result.best_value = {v ? *v : 0.0, branch::none};
        result.n_converged = 0;
        return result;
    }

    detail::Rng rng(opts.seed);
    std::vector<detail::Candidate> candidates;

    // deterministic vertex candidates
    for (std::size_t i = 0; i < n_assets; ++i) {
        std::vector<double> w(n_assets, 0.0);
        w[i] = 1.0;
        PortfolioWeights vertex{std::move(w)};
        const auto v = objective(vertex);
        if (v) candidates.push_back({std::move(vertex), *v});
    }

    const std::size_t dim = n_assets - 1;
    for (std::size_t s = 0; s < opts.n_starts; ++s) {
        detail::NmOutcome outcome;
        for (int attempt = 0; attempt <= 5; ++attempt) {
            const PortfolioWeights w0 = random_simplex(n_assets, rng);
            std::vector<double> t(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                // inverse of the softmax reparameterization, coordinate 0 pinned
                t[j] = std::log(std::max(w0.weights[j + 1], 1e-12)) -
                       std::log(std::max(w0.weights[0], 1e-12));
            }
            outcome = detail::nelder_mead_maximize(objective, t, opts);
            if (outcome.defined) break;
        }
        if (!outcome.defined) continue;  // dropped after retries
        if (outcome.converged) ++result.n_converged;
        PortfolioWeights w = detail::softmax_weights(outcome.point);
        const auto v = objective(w);
        if (!v) continue;
        candidates.push_back({std::move(w), *v});
    }

    if (candidates.empty()) {
        throw std::runtime_error("maximize_objective: objective undefined everywhere probed");
    }

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].value > candidates[best_idx].value) best_idx = i;
    }
    const double best_value = candidates[best_idx].value;
    const double band_lo = std::isinf(best_value)
                               ? best_value
                               : best_value - opts.tol * (1.0 + std::abs(best_value));

    std::vector<const detail::Candidate*> tied;
    for (const auto& c : candidates) {
        if (c.value >= band_lo) tied.push_back(&c);
    }

    PortfolioWeights chosen = candidates[best_idx].weights;
    bool averaged = false;
    if (tied.size() > 1) {
        std::vector<double> mean(n_assets, 0.0);
        for (const auto* c : tied) {
            for (std::size_t j = 0; j < n_assets; ++j) mean[j] += c->weights.weights[j];
        }
        double total = 0.0;
        for (auto& v : mean) {
            v /= static_cast<double>(tied.size());
            total += v;
        }
        for (auto& v : mean) v /= total;
        PortfolioWeights averaged_weights{std::move(mean)};
        const auto v = objective(averaged_weights);
        if (v && *v >= band_lo) {
            chosen = std::move(averaged_weights);
            averaged = true;
        }
    }

    const auto final_value = objective(chosen);
    result.best_weights = PortfolioWeights::validated(chosen.weights);
    result.best_value = {final_value ? *final_value : 0.0, branch::none};
    result.ties_averaged = averaged;
    return result;
}

/// Metric-maximizing portfolio selection. Undefined Lambda-quantiles and
/// evaluation failures (for instance a degenerate parametric fit at a
/// vertex) are treated as undefined objective values.
inline OptResult maximize_metric(const std::vector<std::vector<double>>& asset_returns,
                                 const RankingMetric& metric, const OptimizerOptions& opts) {
    if (asset_returns.empty()) {
        throw std::invalid_argument("maximize_metric: empty return matrix");
    }
    const std::size_t n_assets = asset_returns.front().size();
    const SimplexObjective objective =
        [&asset_returns, &metric](const PortfolioWeights& w) -> std::optional<double> {
        try {
            const MetricValue v = metric.evaluate(portfolio_returns(asset_returns, w));
            if (v.provenance == branch::undefined_quantile) return std::nullopt;
            return v.value;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    OptResult result = maximize_objective(n_assets, objective, opts);
    // re-evaluate through the metric so provenance is reported faithfully
    result.best_value = metric.evaluate(portfolio_returns(asset_returns, result.best_weights));
    return result;
}

/// Bibliometric objective: the SRM rank of the portfolio's own weighted
/// per-asset expected returns, benchmarked against its smallest positive
/// entry. A portfolio with no positive weighted expectation scores 0.
inline OptResult maximize_profile_rank(const std::vector<std::vector<double>>& asset_returns,
                                       const PerfCurveFamily& fam, const OptimizerOptions& opts) {
    if (asset_returns.empty()) {
        throw std::invalid_argument("maximize_profile_rank: empty return matrix");
    }
    const std::size_t n_assets = asset_returns.front().size();
    std::vector<double> mean_returns(n_assets, 0.0);
    for (const auto& row : asset_returns) {
        if (row.size() != n_assets) {
            throw std::invalid_argument("maximize_profile_rank: ragged return matrix");
        }
        for (std::size_t j = 0; j < n_assets; ++j) mean_returns[j] += row[j];
    }
    for (auto& v : mean_returns) v /= static_cast<double>(asset_returns.size());

    const SimplexObjective objective =
        [mean_returns, &fam](const PortfolioWeights& w) -> std::optional<double> {
        std::vector<double> weighted(mean_returns.size());
        for (std::size_t j = 0; j < mean_returns.size(); ++j) {
            weighted[j] = mean_returns[j] * w.weights[j];
        }
        try {
            const auto profiles = build_profiles({weighted});
            return static_cast<double>(srm_rank(profiles.front(), fam));
        } catch (const std::invalid_argument&) {
            return 0.0;  // benchmark undefined: no attainable level
        }
    };
    return maximize_objective(n_assets, objective, opts);
}

}  // namespace rankmetrics
