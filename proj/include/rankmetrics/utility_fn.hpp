#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rankmetrics {

/// Strictly increasing, concave utility function. Three shapes are
/// supported: the identity, the two-branch piecewise-linear form
///
///   u(y) = y                          for y > threshold,
///   u(y) = threshold + (1+m)(y - threshold)  for y <= threshold,
///
/// and a custom knot table interpolated piecewise-linearly (extrapolated
/// with the end slopes, which preserves monotonicity and concavity).
class UtilityFn {
public:
    static UtilityFn identity() {
        UtilityFn u;
        u.kind_ = Kind::identity;
        return u;
    }

    static UtilityFn piecewise_linear(double threshold, double penalty_slope_increment) {
        if (!(penalty_slope_increment >= 0.0)) {
            throw std::invalid_argument("UtilityFn: penalty slope increment must be >= 0");
        }
        UtilityFn u;
        u.kind_ = Kind::piecewise_linear;
        u.theta_ = threshold;
        u.m_ = penalty_slope_increment;
        return u;
    }

    static UtilityFn custom_table(std::vector<double> points, std::vector<double> values) {
        if (points.size() < 2 || points.size() != values.size()) {
            throw std::invalid_argument("UtilityFn: table needs >= 2 aligned knots");
        }
        double prev_slope = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < points.size(); ++i) {
            const double dx = points[i] - points[i - 1];
            const double dv = values[i] - values[i - 1];
            if (!(dx > 0.0) || !(dv > 0.0)) {
                throw std::invalid_argument("UtilityFn: table must be strictly increasing");
            }
            const double slope = dv / dx;
            if (slope > prev_slope + 1e-12) {
                throw std::invalid_argument("UtilityFn: table must be concave");
            }
            prev_slope = slope;
        }
        UtilityFn u;
        u.kind_ = Kind::custom_table;
        u.xs_ = std::move(points);
        u.vs_ = std::move(values);
        return u;
    }

    double value(double y) const {
        switch (kind_) {
            case Kind::identity:
                return y;
            case Kind::piecewise_linear:
                return y > theta_ ? y : theta_ + (1.0 + m_) * (y - theta_);
            case Kind::custom_table:
            default:
                return table_value(y);
        }
    }

    double inverse(double v) const {
        switch (kind_) {
            case Kind::identity:
                return v;
            case Kind::piecewise_linear:
                return v > theta_ ? v : theta_ + (v - theta_) / (1.0 + m_);
            case Kind::custom_table:
            default:
                return table_inverse(v);
        }
    }

    bool is_identity() const { return kind_ == Kind::identity; }

private:
    enum class Kind { identity, piecewise_linear, custom_table };

    UtilityFn() = default;

    double table_value(double y) const {
        const std::size_t n = xs_.size();
        if (y <= xs_.front()) {
            const double s = (vs_[1] - vs_[0]) / (xs_[1] - xs_[0]);
            return vs_.front() + s * (y - xs_.front());
        }
        if (y >= xs_.back()) {
            const double s = (vs_[n - 1] - vs_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
            return vs_.back() + s * (y - xs_.back());
        }
        auto it = std::lower_bound(xs_.begin(), xs_.end(), y);
        const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
        const double t = (y - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
        return vs_[j - 1] + t * (vs_[j] - vs_[j - 1]);
    }

    // Monotone bisection to absolute tolerance 1e-10. Values outside the
    // table range are inverted in closed form on the linear extensions.
    double table_inverse(double v) const {
        const std::size_t n = xs_.size();
        if (v <= vs_.front()) {
            const double s = (vs_[1] - vs_[0]) / (xs_[1] - xs_[0]);
            return xs_.front() + (v - vs_.front()) / s;
        }
        if (v >= vs_.back()) {
            const double s = (vs_[n - 1] - vs_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
            return xs_.back() + (v - vs_.back()) / s;
        }
        double lo = xs_.front();
        double hi = xs_.back();
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (table_value(mid) < v) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    Kind kind_ = Kind::identity;
    double theta_ = 0.0;
    double m_ = 0.0;
    std::vector<double> xs_;
    std::vector<double> vs_;
};

}  // namespace rankmetrics
