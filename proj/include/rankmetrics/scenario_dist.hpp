#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rankmetrics {

/// Finite empirical distribution of a real-valued position: outcomes with
/// strictly positive probabilities summing to one.
///
/// Outcomes are stored sorted ascending; the permutation that maps the
/// sorted storage back to the insertion order is kept for provenance.
/// Instances are immutable after construction, so all operations on them
/// are pure and thread-safe.
class ScenarioDist {
public:
    ScenarioDist(std::vector<double> outcomes, std::vector<double> probabilities) {
        if (outcomes.empty() || outcomes.size() != probabilities.size()) {
            throw std::invalid_argument(
                "ScenarioDist: outcomes and probabilities must have equal, nonzero length");
        }
        double total = 0.0;
        for (double p : probabilities) {
            if (!(p > 0.0)) {
                throw std::invalid_argument("ScenarioDist: every probability must be > 0");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("ScenarioDist: probabilities must sum to 1 within 1e-12");
        }
        for (double x : outcomes) {
            if (!std::isfinite(x)) {
                throw std::invalid_argument("ScenarioDist: outcomes must be finite");
            }
        }

        const std::size_t n = outcomes.size();
        permutation_.resize(n);
        std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
        std::stable_sort(permutation_.begin(), permutation_.end(),
                         [&](std::size_t a, std::size_t b) { return outcomes[a] < outcomes[b]; });

        outcomes_.resize(n);
        probabilities_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            outcomes_[i] = outcomes[permutation_[i]];
            probabilities_[i] = probabilities[permutation_[i]];
        }

        cumulative_.resize(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += probabilities_[i];
            cumulative_[i] = acc;
        }

        const double w = 1.0 / static_cast<double>(n);
        equal_weight_ = std::all_of(probabilities_.begin(), probabilities_.end(),
                                    [&](double p) { return std::abs(p - w) <= 1e-12; });
    }

    /// Equal-weight historical sample.
    static ScenarioDist equal_weights(std::vector<double> outcomes) {
        if (outcomes.empty()) {
            throw std::invalid_argument("ScenarioDist: empty sample");
        }
        std::vector<double> probs(outcomes.size(), 1.0 / static_cast<double>(outcomes.size()));
        return ScenarioDist(std::move(outcomes), std::move(probs));
    }

    /// Degenerate distribution concentrated on a single value.
    static ScenarioDist constant(double value) {
        return ScenarioDist({value}, {1.0});
    }

    std::size_t size() const { return outcomes_.size(); }

    /// Outcomes sorted ascending.
    const std::vector<double>& outcomes() const { return outcomes_; }

    /// Probabilities aligned with outcomes().
    const std::vector<double>& probabilities() const { return probabilities_; }

    /// Maps sorted index -> index in the originally supplied vectors.
    const std::vector<std::size_t>& sort_permutation() const { return permutation_; }

    bool is_equal_weight() const { return equal_weight_; }

    double min_outcome() const { return outcomes_.front(); }
    double max_outcome() const { return outcomes_.back(); }

    /// P(X <= y), right-continuous nondecreasing step function of y.
    double cdf(double y) const {
        auto it = std::upper_bound(outcomes_.begin(), outcomes_.end(), y);
        if (it == outcomes_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - outcomes_.begin()) - 1];
    }

    /// Cumulative probability at the i-th sorted outcome.
    const std::vector<double>& cumulative() const { return cumulative_; }

private:
    std::vector<double> outcomes_;
    std::vector<double> probabilities_;
    std::vector<double> cumulative_;
    std::vector<std::size_t> permutation_;
    bool equal_weight_ = false;
};

inline double expectation(const ScenarioDist& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += d.probabilities()[i] * d.outcomes()[i];
    }
    return s;
}

/// E[max(X, 0)].
inline double pos_part_expectation(const ScenarioDist& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += d.probabilities()[i] * std::max(d.outcomes()[i], 0.0);
    }
    return s;
}

/// E[max(-X, 0)].
inline double neg_part_expectation(const ScenarioDist& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        s += d.probabilities()[i] * std::max(-d.outcomes()[i], 0.0);
    }
    return s;
}

inline double empirical_cdf(const ScenarioDist& d, double y) { return d.cdf(y); }

/// Left-continuous generalized inverse: inf{y : P(X <= y) >= alpha}.
inline double quantile(const ScenarioDist& d, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("quantile: alpha must be in (0, 1)");
    }
    const auto& cum = d.cumulative();
    auto it = std::lower_bound(cum.begin(), cum.end(), alpha);
    if (it == cum.end()) return d.max_outcome();
    return d.outcomes()[static_cast<std::size_t>(it - cum.begin())];
}

/// Pointwise a*x + b with a >= 0; probabilities unchanged.
inline ScenarioDist affine(const ScenarioDist& d, double a, double b) {
    if (!(a >= 0.0)) {
        throw std::invalid_argument("affine: scale must be >= 0");
    }
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out[i] = a * d.outcomes()[i] + b;
    }
    return ScenarioDist(std::move(out), d.probabilities());
}

/// Pointwise lambda*x + (1-lambda)*k; probabilities unchanged.
inline ScenarioDist mix_with_constant(const ScenarioDist& d, double lambda, double k) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("mix_with_constant: lambda must be in [0, 1]");
    }
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out[i] = lambda * d.outcomes()[i] + (1.0 - lambda) * k;
    }
    return ScenarioDist(std::move(out), d.probabilities());
}

/// X + c.
inline ScenarioDist shift(const ScenarioDist& d, double c) { return affine(d, 1.0, c); }

}  // namespace rankmetrics
