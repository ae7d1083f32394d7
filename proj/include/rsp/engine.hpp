#pragma once

#include <span>
#include <utility>

#include <Eigen/SparseCore>

#include "rsp/graph.hpp"
#include "rsp/types.hpp"

namespace rsp {

using SparseMatrix = Eigen::SparseMatrix<Real>;

/// Inverse temperature and iteration controls shared by the solvers.
struct RspParams {
    Real theta = 1.0;
    Real tol = 1e-10;
    Index max_iter = 100000;

    static RspParams engine(Real theta) { return {theta, 1e-10, 100000}; }
    static RspParams dual(Real theta) { return {theta, 1e-8, 500}; }
    static RspParams fixedpoint(Real theta) { return {theta, 1e-10, 1000000}; }

    void check() const;
};

/**
 * The killed-walk transition matrix W = P_ref o exp(-theta C), zero outside
 * the edge set and on the goal row. Dense for small graphs, sparse above
 * kDenseNodeLimit. `underflow` is set when exp(-theta c) rounded to zero on an
 * existing edge, in which case the linear-algebra route is meaningless and
 * callers should switch to the log-domain (soft Bellman-Ford) path.
 */
struct WMatrix {
    Matrix dense;
    SparseMatrix sparse;
    bool is_dense = true;
    bool underflow = false;
    Index n = 0;
    Index goal = 0;
};

/// costs runs per edge in CSR order (original or augmented).
WMatrix build_w(const Graph& g, const ReferenceChain& rc, std::span<const Real> costs,
                const RspParams& params);

/**
 * Backward variables z = column `goal` of (I - W)^-1, computed from the linear
 * system (I - W) z = e_goal. All entries are positive when the goal is
 * reachable; otherwise NotAbsorbingError.
 */
Vector backward_variables(const WMatrix& w);

/// Forward variables, row `source` of (I - W)^-1 via the transposed system.
Vector forward_variables(const WMatrix& w, Index source);

/// phi_i = -(1/theta) log z_i, with phi pinned to exactly zero at the goal.
Vector free_energy(const Vector& z_b, Real theta, Index goal);

/// Optimal biased-walk policy p_ij = w_ij z_j / z_i (rows of non-goal nodes).
Matrix optimal_policy(const WMatrix& w, const Vector& z_b);

/**
 * Multinomial-logistic form of the policy from free energies: on unconstrained
 * rows p_ij is proportional to p_ref_ij exp(-theta (c_ij + phi_j)), max-shifted
 * so it stays finite at any theta; constrained rows are set to q exactly.
 */
Matrix policy_from_free_energy(const Graph& g, const ReferenceChain& rc,
                               std::span<const Real> costs, const Vector& phi, Real theta,
                               const ConstraintSpec& cs = {});

/// Edge flows n_ij = zf_i w_ij zb_j / Z and node flows n_i = zf_i zb_i / Z
/// (Z = zb at the source); the goal's node flow is 1 by absorption.
std::pair<Matrix, Vector> edge_node_flows(const WMatrix& w, const Vector& z_forward,
                                          const Vector& z_backward, Index source);

/// Same flows computed from a row-stochastic policy by the absorbing-chain
/// visit counts (I - P^T) m = e_source; usable at any theta.
std::pair<Matrix, Vector> flows_from_policy(const Graph& g, const Matrix& policy, Index source);

/// <c~> = sum_ij n_ij c_ij over the edge set.
Real expected_cost(const Graph& g, const Matrix& edge_flows);

struct PathEntropies {
    Real rel_entropy = 0;   // J(P*|pi~) = -(log Z + theta <c~>)
    Real total_entropy = 0; // -sum_i n_i sum_j p_ij log p_ij
};

PathEntropies path_entropies(const Graph& g, const Matrix& policy, const Vector& node_flows,
                             Real z_source, Real theta, Real expected_cost);

struct IterationResult {
    Vector phi;
    Index iterations = 0;
    Real residual = 0;
};

/**
 * Soft Bellman-Ford: iterates phi_i <- softmin over successors of
 * (c_ij + phi_j) weighted by the reference row, phi_goal = 0, synchronously
 * from phi = 0, until the max-norm change (contraction-corrected) drops below
 * params.tol. Never forms W, so it is safe at any theta.
 */
IterationResult soft_bellman_ford(const Graph& g, const ReferenceChain& rc,
                                  std::span<const Real> costs, const RspParams& params);

/// Everything the standard (unconstrained) RSP defines for one theta.
struct RspSolution {
    Vector z_b;
    Vector phi;
    Matrix policy;
    Matrix edge_flows;
    Vector node_flows;
    Real expected_cost = 0;
    Real rel_entropy = 0;
    Real total_entropy = 0;
    Index iterations = 0;
    bool converged = true;
    Real residual = 0;
};

/**
 * Standard RSP solve via the linear-algebra route; falls back to the
 * log-domain soft-Bellman-Ford route when W underflows at this theta.
 */
RspSolution solve_standard(const Graph& g, const ReferenceChain& rc, const RspParams& params);

} // namespace rsp
