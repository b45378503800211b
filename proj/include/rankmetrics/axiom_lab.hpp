#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankmetrics/bibliometric.hpp"
#include "rankmetrics/ranking_metrics.hpp"
#include "rankmetrics/risk_measures.hpp"
#include "rankmetrics/scenario_dist.hpp"

namespace rankmetrics {

namespace detail {

/// Deterministic RNG. The uniform draw is derived from raw mt19937_64
/// output rather than std::uniform_real_distribution so that streams are
/// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform01() * static_cast<double>(hi - lo + 1));
    }

    double exponential() { return -std::log(1.0 - uniform01()); }

private:
    std::mt19937_64 engine_;
};

inline constexpr double kSlack = 1e-9;

/// a <= b + slack over the extended reals.
inline bool leq_ext(double a, double b) {
    if (std::isinf(a) && a > 0) return std::isinf(b) && b > 0;
    if (std::isinf(b) && b > 0) return true;
    return a <= b + kSlack;
}

inline double violation_magnitude(double lhs_required_smaller, double rhs) {
    if (std::isinf(lhs_required_smaller) && !std::isinf(rhs)) {
        return std::numeric_limits<double>::infinity();
    }
    return lhs_required_smaller - rhs;
}

inline std::string render(const ScenarioDist& d) {
    std::ostringstream os;
    os.precision(17);
    os << "outcomes=[";
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) os << ", ";
        os << d.outcomes()[i];
    }
    os << "] probs=[";
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) os << ", ";
        os << d.probabilities()[i];
    }
    os << "]";
    return os.str();
}

inline std::string render(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << "]";
    return os.str();
}

}  // namespace detail

/// Deterministic sampler of scenario distributions.
struct DistSampler {
    enum class Scheme { equal, random_simplex };

    std::size_t min_outcomes = 2;
    std::size_t max_outcomes = 12;
    double outcome_min = -5.0;
    double outcome_max = 5.0;
    Scheme scheme = Scheme::equal;
    std::uint64_t seed = 1;

    ScenarioDist sample(detail::Rng& rng) const {
        const auto n = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(min_outcomes),
                            static_cast<std::int64_t>(max_outcomes)));
        std::vector<double> outcomes(n);
        for (auto& x : outcomes) x = rng.uniform(outcome_min, outcome_max);
        if (scheme == Scheme::equal) {
            return ScenarioDist::equal_weights(std::move(outcomes));
        }
        std::vector<double> probs(n);
        double total = 0.0;
        for (auto& p : probs) {
            p = rng.exponential();
            total += p;
        }
        for (auto& p : probs) p /= total;
        return ScenarioDist(std::move(outcomes), std::move(probs));
    }
};

enum class Verdict { holds_on_sample, violated, not_applicable, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds_on_sample: return "holds_on_sample";
        case Verdict::violated: return "violated";
        case Verdict::not_applicable: return "not_applicable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Counterexample {
    std::string inputs;
    double magnitude = 0.0;
    std::uint64_t trial = 0;
};

struct PropertyReport {
    std::string property;
    std::string metric;
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    std::uint64_t skipped = 0;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::not_applicable;
    std::optional<Counterexample> worst;

    void record_violation(double magnitude, std::uint64_t trial, const std::string& inputs) {
        ++violations;
        if (!worst || magnitude > worst->magnitude) {
            worst = Counterexample{inputs, magnitude, trial};
        }
    }

    void finalize() {
        verdict = violations > 0 ? Verdict::violated : Verdict::holds_on_sample;
    }
};

namespace detail {

inline bool censored(const MetricValue& v) { return v.provenance == branch::right_censored; }

}  // namespace detail

/// Monotonicity: r(d) <= r(d + eps) for nonnegative perturbations eps.
inline PropertyReport check_monotonicity(const RankingMetric& r, const DistSampler& s,
                                         std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "monotonicity";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        std::vector<double> bumped = d.outcomes();
        for (auto& x : bumped) x += rng.uniform(0.0, 2.0);
        const ScenarioDist up(std::move(bumped), d.probabilities());
        const MetricValue lo = r.evaluate(d);
        const MetricValue hi = r.evaluate(up);
        if (detail::censored(lo) || detail::censored(hi)) {
            ++rep.skipped;
            continue;
        }
        if (!detail::leq_ext(lo.value, hi.value)) {
            rep.record_violation(detail::violation_magnitude(lo.value, hi.value), t,
                                 "d: " + detail::render(d) + " ; d+eps: " + detail::render(up));
        }
    }
    rep.finalize();
    return rep;
}

/// Cash-quasiconcavity: r(lambda d + (1-lambda) k) >= min{r(d), r(k)}.
inline PropertyReport check_cash_quasiconcavity(const RankingMetric& r, const DistSampler& s,
                                                std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "cash-quasiconcavity";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        const double lambda = rng.uniform01();
        const double k = rng.uniform(s.outcome_min, s.outcome_max);
        const MetricValue rd = r.evaluate(d);
        const MetricValue rk = r.evaluate(ScenarioDist::constant(k));
        const MetricValue rmix = r.evaluate(mix_with_constant(d, lambda, k));
        if (detail::censored(rd) || detail::censored(rk) || detail::censored(rmix)) {
            ++rep.skipped;
            continue;
        }
        const double floor_value = std::fmin(rd.value, rk.value);
        if (!detail::leq_ext(floor_value, rmix.value)) {
            std::ostringstream os;
            os.precision(17);
            os << "d: " << detail::render(d) << " ; lambda=" << lambda << " k=" << k;
            rep.record_violation(detail::violation_magnitude(floor_value, rmix.value), t,
                                 os.str());
        }
    }
    rep.finalize();
    return rep;
}

namespace detail {

/// Pair of positions on a common equiprobable grid, comonotone order.
struct MixTrial {
    ScenarioDist x;
    ScenarioDist y;
    ScenarioDist mix;
    double lambda;
};

inline MixTrial sample_mix_trial(const DistSampler& s, Rng& rng) {
    const auto n = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(s.min_outcomes),
                        static_cast<std::int64_t>(s.max_outcomes)));
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (auto& v : a) v = rng.uniform(s.outcome_min, s.outcome_max);
    for (auto& v : b) v = rng.uniform(s.outcome_min, s.outcome_max);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double lambda = rng.uniform01();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = lambda * a[i] + (1.0 - lambda) * b[i];
    std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    if (s.scheme == DistSampler::Scheme::random_simplex) {
        double total = 0.0;
        for (auto& p : probs) {
            p = rng.exponential();
            total += p;
        }
        for (auto& p : probs) p /= total;
    }
    return {ScenarioDist(a, probs), ScenarioDist(b, probs), ScenarioDist(m, probs), lambda};
}

}  // namespace detail

/// Quasiconcavity over mixtures of two positions paired comonotonically on
/// a shared probability grid.
inline PropertyReport check_quasiconcavity(const RankingMetric& r, const DistSampler& s,
                                           std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "quasiconcavity";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto trial = detail::sample_mix_trial(s, rng);
        const MetricValue rx = r.evaluate(trial.x);
        const MetricValue ry = r.evaluate(trial.y);
        const MetricValue rm = r.evaluate(trial.mix);
        if (detail::censored(rx) || detail::censored(ry) || detail::censored(rm)) {
            ++rep.skipped;
            continue;
        }
        const double floor_value = std::fmin(rx.value, ry.value);
        if (!detail::leq_ext(floor_value, rm.value)) {
            std::ostringstream os;
            os.precision(17);
            os << "x: " << detail::render(trial.x) << " ; y: " << detail::render(trial.y)
               << " ; lambda=" << trial.lambda;
            rep.record_violation(detail::violation_magnitude(floor_value, rm.value), t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// Falsification search for quasiconcavity: the suite succeeds when it
/// finds a counterexample; exhausting the budget yields an inconclusive
/// verdict, never a silent pass.
inline PropertyReport falsify_quasiconcavity(const RankingMetric& r, const DistSampler& s,
                                             std::uint64_t budget) {
    PropertyReport rep = check_quasiconcavity(r, s, budget);
    rep.property = "quasiconcavity (falsification)";
    rep.verdict = rep.violations > 0 ? Verdict::violated : Verdict::inconclusive;
    return rep;
}

/// Cash-subadditivity: r(d + k) <= r(d) + k for k >= 0. With on_support,
/// trials where r(d) = 0 are skipped.
inline PropertyReport check_cash_subadditivity(const RankingMetric& r, const DistSampler& s,
                                               std::uint64_t trials, bool on_support = false) {
    PropertyReport rep;
    rep.property = on_support ? "cash-subadditivity (on support)" : "cash-subadditivity";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        const double k = rng.uniform(0.0, 5.0);
        const MetricValue base = r.evaluate(d);
        if (detail::censored(base)) {
            ++rep.skipped;
            continue;
        }
        if (on_support && base.value == 0.0) {
            ++rep.skipped;
            continue;
        }
        const MetricValue shifted_value = r.evaluate(shift(d, k));
        if (detail::censored(shifted_value)) {
            ++rep.skipped;
            continue;
        }
        const double cap = base.is_infinite() ? base.value : base.value + k;
        if (!detail::leq_ext(shifted_value.value, cap)) {
            std::ostringstream os;
            os.precision(17);
            os << "d: " << detail::render(d) << " ; k=" << k;
            rep.record_violation(detail::violation_magnitude(shifted_value.value, cap), t,
                                 os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// Cash-additivity on the support: |r(d + k) - r(d) - k| <= slack whenever
/// r(d) > 0.
inline PropertyReport check_cash_additivity_on_support(const RankingMetric& r,
                                                       const DistSampler& s,
                                                       std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "cash-additivity (on support)";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        const double k = rng.uniform(0.0, 5.0);
        const MetricValue base = r.evaluate(d);
        if (detail::censored(base) || base.value == 0.0 || base.is_infinite()) {
            ++rep.skipped;
            continue;
        }
        const MetricValue shifted_value = r.evaluate(shift(d, k));
        if (detail::censored(shifted_value)) {
            ++rep.skipped;
            continue;
        }
        const double err = std::abs(shifted_value.value - base.value - k);
        if (err > detail::kSlack) {
            std::ostringstream os;
            os.precision(17);
            os << "d: " << detail::render(d) << " ; k=" << k;
            rep.record_violation(err, t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// Cash-convexity of the acceptance sets: members d and k of A_x mix into
/// A_x. Trials with an empty premise are counted as skips.
inline PropertyReport check_level_sets(const RankingMetric& r, const DistSampler& s,
                                       std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "level-set cash-convexity";
    rep.metric = r.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        const double k = rng.uniform(s.outcome_min, s.outcome_max);
        const double lambda = rng.uniform01();
        const double level = rng.uniform(1e-3, 5.0);
        const MetricValue rd = r.evaluate(d);
        const MetricValue rk = r.evaluate(ScenarioDist::constant(k));
        if (detail::censored(rd) || detail::censored(rk)) {
            ++rep.skipped;
            continue;
        }
        if (!(rd.value >= level && rk.value >= level)) {
            ++rep.skipped;
            continue;
        }
        const MetricValue rmix = r.evaluate(mix_with_constant(d, lambda, k));
        if (!detail::leq_ext(level, rmix.value)) {
            std::ostringstream os;
            os.precision(17);
            os << "d: " << detail::render(d) << " ; k=" << k << " lambda=" << lambda
               << " x=" << level;
            rep.record_violation(detail::violation_magnitude(level, rmix.value), t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// Empirical check of a family's monotone certificate over a level grid.
inline PropertyReport check_family_monotone(const RiskFamily& fam, const DistSampler& s,
                                            std::uint64_t trials, std::size_t n_levels = 50,
                                            double level_max = 10.0) {
    PropertyReport rep;
    rep.property = "family monotone in level";
    rep.metric = fam.name;
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ScenarioDist d = s.sample(rng);
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i <= n_levels; ++i) {
            const double x = level_max * static_cast<double>(i) / static_cast<double>(n_levels);
            const double v = fam.evaluate(x, d);
            if (v < prev - detail::kSlack) {
                std::ostringstream os;
                os.precision(17);
                os << "d: " << detail::render(d) << " ; level=" << x;
                rep.record_violation(prev - v, t, os.str());
                break;
            }
            prev = std::max(prev, v);
        }
    }
    rep.finalize();
    return rep;
}

/// Deliberately anti-monotone metric used to prove the suites can fail.
inline RankingMetric planted_violation_metric() {
    RankingMetric m;
    m.name = "planted-violation";
    m.evaluate = [](const ScenarioDist& d) {
        return MetricValue{std::max(0.0, -expectation(d)), branch::ratio};
    };
    m.traits = {};
    return m;
}

// ---------------------------------------------------------------------------
// Profile-space harness for the bibliometric (SRM) metrics. Mixtures are
// evaluated on the undiscretized real sequences, matching the sequence-space
// setting of the SRM lemmas.
// ---------------------------------------------------------------------------

struct ProfileSampler {
    std::size_t min_assets = 1;
    std::size_t max_assets = 20;
    std::int64_t max_value = 30;
    std::uint64_t seed = 1;

    std::vector<std::int64_t> sample(detail::Rng& rng) const {
        const auto n = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(min_assets),
                            static_cast<std::int64_t>(max_assets)));
        std::vector<std::int64_t> values(n);
        for (auto& v : values) v = rng.uniform_int(0, max_value);
        std::sort(values.begin(), values.end(), std::greater<>());
        return values;
    }
};

inline PropertyReport check_profile_monotonicity(const PerfCurveFamily& fam,
                                                 const ProfileSampler& s, std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "monotonicity (profiles)";
    rep.metric = fam.name();
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto values = s.sample(rng);
        const std::int64_t before = srm_rank(RankedProfile(values), fam);
        const auto idx = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(values.size()) - 1));
        values[idx] += rng.uniform_int(1, 5);
        const std::int64_t after = srm_rank(RankedProfile(values), fam);
        if (after < before) {
            std::ostringstream os;
            os << "raised entry " << idx << " ; before=" << before << " after=" << after;
            rep.record_violation(static_cast<double>(before - after), t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

inline PropertyReport check_profile_cash_quasiconcavity(const PerfCurveFamily& fam,
                                                        const ProfileSampler& s,
                                                        std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "cash-quasiconcavity (profiles)";
    rep.metric = fam.name();
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto ints = s.sample(rng);
        std::vector<double> profile(ints.begin(), ints.end());
        const double k = rng.uniform(0.0, static_cast<double>(s.max_value));
        const double lambda = rng.uniform01();
        const std::int64_t rank_profile = srm_rank_seq(profile, 0.0, fam);
        const std::int64_t rank_const = srm_rank_seq({}, k, fam);
        std::vector<double> mixed(profile.size());
        for (std::size_t i = 0; i < profile.size(); ++i) {
            mixed[i] = lambda * profile[i] + (1.0 - lambda) * k;
        }
        const std::int64_t rank_mixed = srm_rank_seq(mixed, (1.0 - lambda) * k, fam);
        const std::int64_t floor_rank = std::min(rank_profile, rank_const);
        if (rank_mixed < floor_rank) {
            std::ostringstream os;
            os.precision(17);
            os << "profile=" << detail::render(profile) << " k=" << k << " lambda=" << lambda
               << " ; mix rank " << rank_mixed << " < " << floor_rank;
            rep.record_violation(static_cast<double>(floor_rank - rank_mixed), t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// Quasiconcavity over real-valued profile mixtures at the lambda grid
/// {0, 0.25, 0.5, 0.75, 1}.
inline PropertyReport check_profile_quasiconcavity(const PerfCurveFamily& fam,
                                                   const ProfileSampler& s,
                                                   std::uint64_t trials) {
    PropertyReport rep;
    rep.property = "quasiconcavity (profiles)";
    rep.metric = fam.name();
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    constexpr double lambdas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto pa = s.sample(rng);
        const auto pb = s.sample(rng);
        const std::size_t n = std::max(pa.size(), pb.size());
        std::vector<double> a(n, 0.0);
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i < pa.size(); ++i) a[i] = static_cast<double>(pa[i]);
        for (std::size_t i = 0; i < pb.size(); ++i) b[i] = static_cast<double>(pb[i]);
        const std::int64_t ra = srm_rank_seq(a, 0.0, fam);
        const std::int64_t rb = srm_rank_seq(b, 0.0, fam);
        const std::int64_t floor_rank = std::min(ra, rb);
        const double lambda = lambdas[rng.uniform_int(0, 4)];
        std::vector<double> mixed(n);
        for (std::size_t i = 0; i < n; ++i) mixed[i] = lambda * a[i] + (1.0 - lambda) * b[i];
        const std::int64_t rm = srm_rank_seq(mixed, 0.0, fam);
        if (rm < floor_rank) {
            std::ostringstream os;
            os.precision(17);
            os << "a=" << detail::render(a) << " b=" << detail::render(b)
               << " lambda=" << lambda << " ; mix rank " << rm << " < " << floor_rank;
            rep.record_violation(static_cast<double>(floor_rank - rm), t, os.str());
        }
    }
    rep.finalize();
    return rep;
}

/// rank(P + k) <= rank(P) + k on nonnegative profiles, with the shift
/// regime (minimum k, integer or real) chosen by the caller to match the
/// regime in which the family is known to be cash-subadditive.
inline PropertyReport check_profile_cash_subadditivity(const PerfCurveFamily& fam,
                                                       const ProfileSampler& s,
                                                       std::uint64_t trials, double min_shift,
                                                       double max_shift = 5.0) {
    PropertyReport rep;
    rep.property = "cash-subadditivity (profiles)";
    rep.metric = fam.name();
    rep.trials = trials;
    rep.seed = s.seed;
    detail::Rng rng(s.seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto ints = s.sample(rng);
        std::vector<double> profile(ints.begin(), ints.end());
        const double k = rng.uniform(min_shift, max_shift);
        const std::int64_t base = srm_rank_seq(profile, 0.0, fam);
        std::vector<double> shifted_profile(profile.size());
        for (std::size_t i = 0; i < profile.size(); ++i) shifted_profile[i] = profile[i] + k;
        const std::int64_t after = srm_rank_seq(shifted_profile, k, fam);
        if (static_cast<double>(after) > static_cast<double>(base) + k + detail::kSlack) {
            std::ostringstream os;
            os.precision(17);
            os << "profile=" << detail::render(profile) << " k=" << k << " ; rank "
               << after << " > " << base << " + k";
            rep.record_violation(static_cast<double>(after) - static_cast<double>(base) - k, t,
                                 os.str());
        }
    }
    rep.finalize();
    return rep;
}

}  // namespace rankmetrics
