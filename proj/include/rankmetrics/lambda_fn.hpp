#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace rankmetrics {

/// Monotone-step level function Lambda: R -> (0, 1] used by Lambda-quantiles.
///
/// Stored as a left-continuous step function: values_[j] applies on the
/// interval (breakpoints_[j-1], breakpoints_[j]], with the first value
/// extending to -infinity and the last beyond the final breakpoint.
class LambdaFn {
public:
    static LambdaFn constant(double level) {
        check_level(level, /*strict_upper=*/false);
        LambdaFn f;
        f.values_ = {level};
        return f;
    }

    /// Value `before` on (-inf, threshold], `after` on (threshold, inf).
    /// No ordering is imposed between the two levels.
    static LambdaFn two_step(double before, double after, double threshold) {
        check_level(before, /*strict_upper=*/true);
        check_level(after, /*strict_upper=*/true);
        LambdaFn f;
        f.breakpoints_ = {threshold};
        f.values_ = {before, after};
        return f;
    }

    /// General step table: values.size() must equal breakpoints.size() + 1
    /// and breakpoints must be strictly increasing.
    static LambdaFn step_table(std::vector<double> breakpoints, std::vector<double> values) {
        if (values.size() != breakpoints.size() + 1) {
            throw std::invalid_argument("LambdaFn: need one more value than breakpoints");
        }
        for (std::size_t i = 1; i < breakpoints.size(); ++i) {
            if (!(breakpoints[i - 1] < breakpoints[i])) {
                throw std::invalid_argument("LambdaFn: breakpoints must be strictly increasing");
            }
        }
        for (double v : values) check_level(v, /*strict_upper=*/false);
        LambdaFn f;
        f.breakpoints_ = std::move(breakpoints);
        f.values_ = std::move(values);
        return f;
    }

    double value(double y) const {
        auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), y);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }

    /// Limit of the step function from the right of y.
    double value_right(double y) const {
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    bool is_nonincreasing() const {
        for (std::size_t i = 1; i < values_.size(); ++i) {
            if (values_[i] > values_[i - 1]) return false;
        }
        return true;
    }

    bool is_nondecreasing() const {
        for (std::size_t i = 1; i < values_.size(); ++i) {
            if (values_[i] < values_[i - 1]) return false;
        }
        return true;
    }

private:
    LambdaFn() = default;

    static void check_level(double v, bool strict_upper) {
        const bool ok = strict_upper ? (v > 0.0 && v < 1.0) : (v > 0.0 && v <= 1.0);
        if (!ok) {
            throw std::invalid_argument(strict_upper
                                            ? "LambdaFn: two-step levels must lie in (0, 1)"
                                            : "LambdaFn: levels must lie in (0, 1]");
        }
    }

    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

}  // namespace rankmetrics
