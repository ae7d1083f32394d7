#include "rsp/fixedpoint.hpp"

#include <cmath>
#include <limits>

#include "iteration_detail.hpp"
#include "rsp/log.hpp"

namespace rsp {

namespace {

void apply_map(const Graph& g, const ReferenceChain& rc, const ConstraintSpec& cs, Real theta,
               const Vector& phi, Vector& next) {
    for (Index i = 0; i < g.size(); ++i) {
        if (i == g.goal()) {
            next[i] = 0.0;
            continue;
        }
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        const Index b = g.row_begin(i);
        if (cs.is_constrained(i)) {
            Real acc = 0;
            for (Index k = 0; k < g.out_degree(i); ++k)
                acc += rc[b + k] * (cost[k] + phi[succ[k]]);
            next[i] = acc;
            continue;
        }
        Real shift = std::numeric_limits<Real>::infinity();
        for (Index k = 0; k < g.out_degree(i); ++k)
            if (rc[b + k] > 0) shift = std::min(shift, cost[k] + phi[succ[k]]);
        Real acc = 0;
        for (Index k = 0; k < g.out_degree(i); ++k) {
            if (rc[b + k] <= 0) continue;
            acc += rc[b + k] * std::expm1(-theta * (cost[k] + phi[succ[k]] - shift));
        }
        next[i] = shift - std::log1p(acc) / theta;
    }
}

} // namespace

RspSolution solve_constrained_fixedpoint(const Graph& g, const ReferenceChain& rc,
                                         const ConstraintSpec& cs, const RspParams& params,
                                         const std::optional<Vector>& initial) {
    params.check();
    Vector phi = initial.value_or(Vector::Zero(g.size()));
    if (phi.size() != g.size()) throw Error("initial phi has the wrong size");
    phi[g.goal()] = 0.0;
    Vector next = Vector::Zero(g.size());

    detail::ConvergenceMonitor monitor(params.tol);
    Real prev_delta = std::numeric_limits<Real>::infinity();
    Index iterations = 0;
    Real delta = std::numeric_limits<Real>::infinity();
    bool warned_negative = false;
    bool warned_nonmonotone = false;
    bool done = false;
    for (Index it = 1; it <= params.max_iter && !done; ++it) {
        apply_map(g, rc, cs, params.theta, phi, next);
        delta = (next - phi).cwiseAbs().maxCoeff();
        phi.swap(next);
        iterations = it;
        if (!warned_negative && (phi.array() < 0).any()) {
            log::warn("fixedpoint: phi has negative entries (zero-cost cycles?); the contraction "
                      "argument assumes the positive quadrant");
            warned_negative = true;
        }
        if (it > 5 && delta > prev_delta && !warned_nonmonotone) {
            log::warn("fixedpoint: residual increased at iteration ", it, " (", prev_delta,
                      " -> ", delta, ")");
            warned_nonmonotone = true;
        }
        prev_delta = delta;
        done = monitor.done(delta, phi.cwiseAbs().maxCoeff());
    }
    if (!done)
        throw MaxIterExceededError("constrained fixedpoint solver did not converge", iterations,
                                   delta);

    RspSolution sol;
    sol.phi = std::move(phi);
    sol.z_b = (-params.theta * sol.phi.array()).exp();
    sol.policy = policy_from_free_energy(g, rc, g.costs(), sol.phi, params.theta, cs);
    std::tie(sol.edge_flows, sol.node_flows) = flows_from_policy(g, sol.policy, g.source());
    sol.expected_cost = expected_cost(g, sol.edge_flows);
    PathEntropies h = path_entropies(g, sol.policy, sol.node_flows,
                                     -params.theta * sol.phi[g.source()], params.theta,
                                     sol.expected_cost);
    sol.rel_entropy = h.rel_entropy;
    sol.total_entropy = h.total_entropy;
    sol.iterations = iterations;
    sol.residual = delta;
    sol.converged = true;
    return sol;
}

JacobianCheck jacobian_spectral_check(const Graph& g, const ReferenceChain& rc,
                                      const ConstraintSpec& cs, const Vector& phi, Real theta) {
    if (g.size() > kDenseNodeLimit) throw Error("jacobian check requires the dense path");
    const Index n = g.size();
    Matrix jac = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        if (i == g.goal()) continue;
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        const Index b = g.row_begin(i);
        if (cs.is_constrained(i)) {
            for (Index k = 0; k < g.out_degree(i); ++k) jac(i, succ[k]) = rc[b + k];
            continue;
        }
        Real shift = std::numeric_limits<Real>::infinity();
        for (Index k = 0; k < g.out_degree(i); ++k)
            if (rc[b + k] > 0) shift = std::min(shift, cost[k] + phi[succ[k]]);
        Real total = 0;
        for (Index k = 0; k < g.out_degree(i); ++k) {
            if (rc[b + k] <= 0) continue;
            const Real v = rc[b + k] * std::exp(-theta * (cost[k] + phi[succ[k]] - shift));
            jac(i, succ[k]) = v;
            total += v;
        }
        for (Index k = 0; k < g.out_degree(i); ++k) jac(i, succ[k]) /= total;
    }

    JacobianCheck out;
    Vector row_sums = jac.rowwise().sum();
    out.goal_row_sum = row_sums[g.goal()];
    out.max_row_sum = row_sums.maxCoeff();
    out.substochastic =
        (jac.array() >= 0).all() && out.max_row_sum <= 1.0 + 1e-12 && out.goal_row_sum < 1.0;

    // Power iteration on (J + I)/2: same spectral ordering, but aperiodic, so
    // the iteration cannot cycle on bipartite structures.
    Vector v = Vector::Ones(n) / static_cast<Real>(n);
    Real lambda = 0;
    for (int it = 0; it < 500; ++it) {
        Vector w = 0.5 * (jac * v + v);
        const Real norm = w.cwiseAbs().maxCoeff();
        if (norm == 0) {
            lambda = 0;
            break;
        }
        lambda = norm;
        v = w / norm;
    }
    out.spectral_radius_estimate = 2.0 * lambda - 1.0;
    return out;
}

} // namespace rsp
