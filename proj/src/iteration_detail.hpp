#pragma once

#include <cmath>
#include <limits>

#include "rsp/types.hpp"

namespace rsp::detail {

// Declares convergence once the max-norm update Delta satisfies both
// Delta < tol and Delta * rho/(1-rho) < tol, with the contraction factor rho
// estimated over a two-step window (iterations on bipartite structures have
// period-2 update ratios). This bounds the distance to the fixed point by
// ~tol, not just the size of the last step. Updates at the rounding floor of
// the iterates (passed as `scale`) also count as converged: no further
// iteration can improve on them.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(Real tol) : tol_(tol) {}

    bool done(Real delta, Real scale = 1.0) {
        Real rho = 0.9999;
        if (std::isfinite(prev2_) && prev2_ > 0)
            rho = std::min(rho, std::sqrt(std::max(delta, Real(0)) / prev2_));
        prev2_ = prev1_;
        prev1_ = delta;
        if (delta == 0) return true;
        if (delta >= tol_) return false;
        const Real floor = 64 * std::numeric_limits<Real>::epsilon() * (1 + std::abs(scale));
        return delta * rho / (1 - rho) < tol_ || delta <= floor;
    }

private:
    Real tol_;
    Real prev1_ = std::numeric_limits<Real>::quiet_NaN();
    Real prev2_ = std::numeric_limits<Real>::quiet_NaN();
};

} // namespace rsp::detail
