#pragma once

#include <optional>

#include "rsp/engine.hpp"

namespace rsp {

/**
 * Soft Bellman-Ford fixed point for the constrained RSP:
 *
 *   phi_i = softmin over successors of (c_ij + phi_j)   (unconstrained rows)
 *   phi_i = sum_j p_ref_ij (c_ij + phi_j)               (constrained rows)
 *   phi_goal = 0
 *
 * Synchronous (Jacobi) updates from phi = 0 (or `initial` when given), the
 * goal entry pinned to zero every iteration. No W matrix is ever formed, which
 * makes this the solver of choice at large theta. The policy on unconstrained
 * rows comes from the multinomial-logistic form with the original costs;
 * constrained rows are set to q exactly.
 */
RspSolution solve_constrained_fixedpoint(const Graph& g, const ReferenceChain& rc,
                                         const ConstraintSpec& cs, const RspParams& params,
                                         const std::optional<Vector>& initial = std::nullopt);

struct JacobianCheck {
    Real spectral_radius_estimate = 0;
    bool substochastic = false;
    Real max_row_sum = 0;
    Real goal_row_sum = 0;
};

/**
 * Assembles the Jacobian of the fixed-point map at phi (softmax weights on
 * unconstrained rows, the reference row on constrained rows, zero on the goal
 * row) and reports sub-stochasticity plus a power-iteration estimate of its
 * spectral radius; both certify the contraction property.
 */
JacobianCheck jacobian_spectral_check(const Graph& g, const ReferenceChain& rc,
                                      const ConstraintSpec& cs, const Vector& phi, Real theta);

} // namespace rsp
