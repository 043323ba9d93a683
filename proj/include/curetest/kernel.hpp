// Kernel and bandwidth configuration for the conditional estimators.
#pragma once

#include <stdexcept>

namespace curetest {

// Epanechnikov kernel K(u) = 0.75 (1 - u^2) on [-1, 1].
inline double epanechnikov(double u) {
    double a = 1.0 - u * u;
    return a > 0.0 ? 0.75 * a : 0.0;
}

// A kernel weight for distance v at bandwidth h. The 1/h rescaling factor is
// omitted: every use is either weight normalization (where it cancels) or a
// density estimate that applies it explicitly.
inline double kernel_weight(double v, double h) { return epanechnikov(v / h); }

struct kernel_config {
    double bandwidth;

    explicit kernel_config(double h) : bandwidth(h) {
        if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    }
};

}  // namespace curetest
