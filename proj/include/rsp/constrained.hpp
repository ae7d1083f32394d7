#pragma once

#include <span>
#include <vector>

#include "rsp/engine.hpp"

namespace rsp {

/**
 * Augmented costs c' = c + Delta on constrained rows (c' = c elsewhere),
 * stored per edge in CSR order. Delta is derived from the Lagrange multipliers
 * of the transition-probability constraints and is q-centered per node:
 * sum_j q_ij Delta_ij = 0, so the q-weighted mean of c' equals the q-weighted
 * mean of c on every constrained node.
 */
struct AugmentedCosts {
    std::vector<Real> c_prime;
    std::vector<Real> delta;  // zero on unconstrained rows
    std::vector<Real> lambda; // -(c_ij + phi_j), fixed up to a per-node shift
};

/// Per-sweep dual objective L* = -T log Z', max constraint residual
/// |n_ij/n_i - q_ij|, and worst centering violation |sum_j q_ij Delta_ij| over
/// the constrained rows; the objective is non-decreasing (ascent on a concave
/// dual) and centering is an algebraic identity of the update.
struct DualTrace {
    std::vector<Real> dual_objective;
    std::vector<Real> constraint_residual;
    std::vector<Real> centering_violation;
};

struct DualSolveResult {
    RspSolution solution;
    AugmentedCosts costs;
    DualTrace trace;
};

/**
 * Closed-form solution of the multinomial logistic system
 * gamma_i exp(-theta x_i) / sum_j gamma_j exp(-theta x_j) = q_i subject to
 * sum_i q_i x_i = 0:
 *
 *   x_i = -(1/theta) (log(q_i/gamma_i) - sum_j q_j log(q_j/gamma_j)).
 *
 * Throws ZeroGammaError when gamma_i = 0 somewhere q_i > 0.
 */
Vector solve_logistic_system(const Vector& gamma, const Vector& q, Real theta);

/// Block update for one constrained node:
/// c'_ij <- sum_k p_ref_ik (c_ik + phi_k) - phi_j over j in Succ(i).
/// The returned row is aligned with g.successors(i).
std::vector<Real> update_augmented_costs(Index i, const Vector& phi, const Graph& g,
                                         const ReferenceChain& rc);

/// Dual Lagrange objective -T log Z' from the augmented-cost backward variable
/// at the source.
Real dual_objective(Real z_source, Real theta);

/**
 * Lagrange-duality block-coordinate ascent for the constrained RSP. Augmented
 * costs start at the original costs; each sweep visits the constrained nodes
 * in ascending order, refreshing the backward solve before every node update,
 * and the sweep loop stops when the free-energy vector changes by less than
 * params.tol in max norm (params.max_iter caps the number of sweeps).
 *
 * Throws UnderflowAtThetaError when W' underflows (use the fixedpoint solver),
 * MaxIterExceededError when the sweep cap is hit.
 */
DualSolveResult solve_constrained_dual(const Graph& g, const ReferenceChain& rc,
                                       const ConstraintSpec& cs, const RspParams& params);

} // namespace rsp
