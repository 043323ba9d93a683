// Right-continuous nonincreasing step function on [0, inf), the common
// representation of every survival / censoring distribution estimate.
#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace curetest {

// Value is 1 before the first jump and values_[k] immediately after jump k.
// Jump times are strictly increasing, values nonincreasing within [0, 1].
// Evaluation at a jump time returns the post-jump value (right continuity,
// the product-limit convention).
class step_curve {
  public:
    step_curve() = default;

    step_curve(std::vector<double> jump_times, std::vector<double> values)
        : times_(std::move(jump_times)), values_(std::move(values)) {
        if (times_.size() != values_.size())
            throw std::invalid_argument("step_curve: times/values size mismatch");
        double prev_t = -1.0, prev_v = 1.0;
        for (std::size_t k = 0; k < times_.size(); ++k) {
            if (!(times_[k] >= 0.0) || !(times_[k] > prev_t))
                throw std::invalid_argument("step_curve: jump times must be increasing and >= 0");
            if (values_[k] < -1e-12 || values_[k] > prev_v + 1e-12)
                throw std::invalid_argument("step_curve: values must be nonincreasing in [0,1]");
            values_[k] = std::min(prev_v, std::max(0.0, values_[k]));
            prev_t = times_[k];
            prev_v = values_[k];
        }
    }

    double operator()(double t) const {
        // Largest jump time <= t, or 1 if none.
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) return 1.0;
        return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
    }

    bool empty() const { return times_.empty(); }
    std::size_t jump_count() const { return times_.size(); }
    const std::vector<double>& jump_times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

    // Plateau value after the last jump (1 when the curve never jumps).
    double final_value() const { return values_.empty() ? 1.0 : values_.back(); }

    // Total probability mass of the associated distribution 1 - curve.
    double total_mass() const { return 1.0 - final_value(); }

  private:
    std::vector<double> times_;
    std::vector<double> values_;
};

}  // namespace curetest
