#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankmetrics {

/// Nonnegative, descending integer asset-performance vector. Entries beyond
/// n_assets() are implicitly zero.
class RankedProfile {
public:
    explicit RankedProfile(std::vector<std::int64_t> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw std::invalid_argument("RankedProfile: needs at least one entry");
        }
        for (auto v : values_) {
            if (v < 0) throw std::invalid_argument("RankedProfile: entries must be >= 0");
        }
        std::sort(values_.begin(), values_.end(), std::greater<>());
    }

    const std::vector<std::int64_t>& values() const { return values_; }
    std::size_t n_assets() const { return values_.size(); }

private:
    std::vector<std::int64_t> values_;
};

/// Level-indexed family of performance curves f_x(p), nondecreasing in the
/// level x at every rank p. Built-ins:
///   h:        x   on (0, x]
///   h2:       x^2 on (0, x]
///   h_alpha:  alpha*x on (0, x]
///   w:        -p + x + 1 on (0, x]
/// Custom families are step tables on integer (level, rank) knots, zero
/// elsewhere, defined for levels 1..max_level only.
class PerfCurveFamily {
public:
    static PerfCurveFamily h() { return PerfCurveFamily(Kind::h, 0.0, "h"); }
    static PerfCurveFamily h2() { return PerfCurveFamily(Kind::h2, 0.0, "h2"); }

    static PerfCurveFamily h_alpha(double alpha) {
        if (!(alpha > 0.0)) {
            throw std::invalid_argument("PerfCurveFamily: alpha must be > 0");
        }
        std::ostringstream name;
        name << "halpha:" << alpha;
        return PerfCurveFamily(Kind::h_alpha, alpha, name.str());
    }

    static PerfCurveFamily w() { return PerfCurveFamily(Kind::w, 0.0, "w"); }

    /// Custom table entries (level, rank) -> value. Rejects tables that are
    /// not nondecreasing in the level at any rank present; the implicit
    /// zero outside the table makes a value that disappears at a higher
    /// level a violation.
    static PerfCurveFamily custom(std::string name,
                                  std::map<std::pair<std::int64_t, std::int64_t>, double> table) {
        if (table.empty()) {
            throw std::invalid_argument("PerfCurveFamily: empty custom table");
        }
        std::int64_t max_level = 0;
        std::int64_t max_rank = 0;
        for (const auto& [key, value] : table) {
            if (key.first < 1 || key.second < 1) {
                throw std::invalid_argument("PerfCurveFamily: levels and ranks must be >= 1");
            }
            if (!(value >= 0.0)) {
                throw std::invalid_argument("PerfCurveFamily: curve values must be >= 0");
            }
            max_level = std::max(max_level, key.first);
            max_rank = std::max(max_rank, key.second);
        }
        PerfCurveFamily fam(Kind::custom, 0.0, std::move(name));
        fam.table_ = std::move(table);
        fam.max_level_ = max_level;
        fam.max_rank_ = max_rank;
        for (std::int64_t p = 1; p <= max_rank; ++p) {
            double prev = 0.0;
            bool rank_used = false;
            for (std::int64_t x = 1; x <= max_level; ++x) {
                const double v = fam.table_lookup(x, p);
                rank_used = rank_used || v > 0.0;
                if (rank_used && v < prev - 1e-12) {
                    throw std::invalid_argument(
                        "PerfCurveFamily: custom table not nondecreasing in the level");
                }
                prev = std::max(prev, v);
            }
        }
        return fam;
    }

    /// Plain-text loader: lines of "level, rank, value"; '#' comments and
    /// blank lines are skipped.
    static PerfCurveFamily custom_from_stream(std::string name, std::istream& in) {
        std::map<std::pair<std::int64_t, std::int64_t>, double> table;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            std::int64_t level = 0;
            std::int64_t rank = 0;
            double value = 0.0;
            if (!(row >> level >> rank >> value)) {
                throw std::invalid_argument("curve table: malformed line " +
                                            std::to_string(line_no));
            }
            table[{level, rank}] = value;
        }
        return custom(std::move(name), std::move(table));
    }

    /// f_x(p) for level x > 0 and rank p > 0.
    double eval(std::int64_t level, double p) const {
        if (level < 1 || !(p > 0.0)) {
            throw std::invalid_argument("curve_eval: level and rank must be positive");
        }
        const double x = static_cast<double>(level);
        switch (kind_) {
            case Kind::h:
                return p <= x ? x : 0.0;
            case Kind::h2:
                return p <= x ? x * x : 0.0;
            case Kind::h_alpha:
                return p <= x ? alpha_ * x : 0.0;
            case Kind::w:
                return p <= x ? -p + x + 1.0 : 0.0;
            case Kind::custom:
            default: {
                const double rounded = std::nearbyint(p);
                if (std::abs(p - rounded) > 1e-9) return 0.0;
                return table_lookup(level, static_cast<std::int64_t>(rounded));
            }
        }
    }

    /// Largest rank at which f_x can be positive.
    std::int64_t support_bound(std::int64_t level) const {
        return kind_ == Kind::custom ? max_rank_ : level;
    }

    /// Levels above this are out of range for custom tables; 0 = unbounded.
    std::int64_t max_level() const { return kind_ == Kind::custom ? max_level_ : 0; }

    const std::string& name() const { return name_; }

private:
    enum class Kind { h, h2, h_alpha, w, custom };

    PerfCurveFamily(Kind kind, double alpha, std::string name)
        : kind_(kind), alpha_(alpha), name_(std::move(name)) {}

    double table_lookup(std::int64_t level, std::int64_t rank) const {
        const auto it = table_.find({level, rank});
        return it == table_.end() ? 0.0 : it->second;
    }

    Kind kind_;
    double alpha_;
    std::string name_;
    std::map<std::pair<std::int64_t, std::int64_t>, double> table_;
    std::int64_t max_level_ = 0;
    std::int64_t max_rank_ = 0;
};

namespace detail {

// Comparisons carry a small slack so that real-valued mixtures computed in
// floating point cannot drop a rank by one ulp. Profile values and curve
// values are at least 0.5 apart wherever the comparison is decisive, so the
// slack never changes an exact integer comparison.
inline constexpr double kRankSlack = 1e-9;

inline bool level_attained(const std::vector<double>& values, double tail,
                           const PerfCurveFamily& fam, std::int64_t level) {
    const auto n = static_cast<std::int64_t>(values.size());
    const std::int64_t bound = std::max(n, fam.support_bound(level));
    for (std::int64_t p = 1; p <= bound; ++p) {
        const double xp = p <= n ? values[static_cast<std::size_t>(p - 1)] : tail;
        if (xp < fam.eval(level, static_cast<double>(p)) - kRankSlack) return false;
    }
    return true;
}

}  // namespace detail

/// SRM rank of a real-valued nonincreasing sequence: the values vector, then
/// a constant tail beyond it. Feasible levels form a down-set because the
/// curves are nondecreasing in the level, so the scan stops at the first
/// unattained level.
inline std::int64_t srm_rank_seq(const std::vector<double>& descending_values, double tail,
                                 const PerfCurveFamily& fam) {
    if (!(tail >= 0.0)) {
        throw std::invalid_argument("srm_rank_seq: tail must be >= 0");
    }
    for (std::size_t i = 0; i < descending_values.size(); ++i) {
        const double floor_value = i + 1 < descending_values.size()
                                       ? descending_values[i + 1]
                                       : tail;
        if (descending_values[i] < floor_value - detail::kRankSlack ||
            descending_values[i] < -detail::kRankSlack) {
            throw std::invalid_argument("srm_rank_seq: sequence must be nonincreasing and >= 0");
        }
    }
    std::int64_t rank = 0;
    std::int64_t level = 1;
    while (fam.max_level() == 0 || level <= fam.max_level()) {
        if (!detail::level_attained(descending_values, tail, fam, level)) break;
        rank = level;
        ++level;
    }
    return rank;
}

/// sup{x > 0 : X(p) >= f_x(p) for all p}, over positive integer levels.
inline std::int64_t srm_rank(const RankedProfile& profile, const PerfCurveFamily& fam) {
    std::vector<double> values(profile.values().begin(), profile.values().end());
    return srm_rank_seq(values, 0.0, fam);
}

inline double curve_eval(const PerfCurveFamily& fam, std::int64_t level, double rank) {
    return fam.eval(level, rank);
}

/// Benchmark-rescaled integer profiles from weighted expected returns, one
/// row per portfolio (rows may be ragged). Negative entries are zeroed, the
/// benchmark is the smallest strictly positive entry across all rows, and
/// ratios are floored into integers.
inline std::vector<RankedProfile> build_profiles(
    const std::vector<std::vector<double>>& weighted_expected_returns) {
    double benchmark = std::numeric_limits<double>::infinity();
    for (const auto& row : weighted_expected_returns) {
        for (double v : row) {
            if (v > 0.0) benchmark = std::min(benchmark, v);
        }
    }
    if (!std::isfinite(benchmark)) {
        throw std::invalid_argument("benchmark undefined");
    }
    std::vector<RankedProfile> profiles;
    profiles.reserve(weighted_expected_returns.size());
    for (const auto& row : weighted_expected_returns) {
        if (row.empty()) {
            throw std::invalid_argument("build_profiles: empty portfolio row");
        }
        std::vector<std::int64_t> values(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double positive = std::max(row[i], 0.0);
            // the tiny offset guards exact ratios against one-ulp misses
            values[i] = static_cast<std::int64_t>(std::floor(positive / benchmark + 1e-9));
        }
        profiles.emplace_back(std::move(values));
    }
    return profiles;
}

/// Spec-shaped entry point: a rectangular [portfolio x asset] expectation
/// matrix and one weight per asset column.
inline std::vector<RankedProfile> build_profile(
    const std::vector<std::vector<double>>& expected_returns, const std::vector<double>& weights) {
    std::vector<std::vector<double>> weighted;
    weighted.reserve(expected_returns.size());
    for (const auto& row : expected_returns) {
        if (row.size() != weights.size()) {
            throw std::invalid_argument("build_profile: row width must match weight count");
        }
        std::vector<double> wrow(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) wrow[i] = weights[i] * row[i];
        weighted.push_back(std::move(wrow));
    }
    return build_profiles(weighted);
}

}  // namespace rankmetrics
