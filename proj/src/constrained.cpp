#include "rsp/constrained.hpp"

#include <cmath>
#include <limits>

#include "rsp/log.hpp"

namespace rsp {

Vector solve_logistic_system(const Vector& gamma, const Vector& q, Real theta) {
    if (gamma.size() != q.size()) throw Error("gamma and q must have the same size");
    const Index n = gamma.size();
    Vector log_ratio = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        if (q[i] <= 0) continue;
        if (gamma[i] <= 0) throw ZeroGammaError(i);
        log_ratio[i] = std::log(q[i] / gamma[i]);
    }
    Real mean = 0;
    for (Index i = 0; i < n; ++i) mean += q[i] * log_ratio[i];
    Vector x = Vector::Zero(n);
    for (Index i = 0; i < n; ++i)
        if (q[i] > 0) x[i] = -(log_ratio[i] - mean) / theta;
    return x;
}

std::vector<Real> update_augmented_costs(Index i, const Vector& phi, const Graph& g,
                                         const ReferenceChain& rc) {
    auto succ = g.successors(i);
    auto cost = g.edge_costs(i);
    const Index b = g.row_begin(i);
    Real base = 0; // sum_k p_ref_ik (c_ik + phi_k)
    for (Index k = 0; k < g.out_degree(i); ++k) base += rc[b + k] * (cost[k] + phi[succ[k]]);
    std::vector<Real> row(static_cast<size_t>(g.out_degree(i)));
    for (Index k = 0; k < g.out_degree(i); ++k) row[static_cast<size_t>(k)] = base - phi[succ[k]];
    return row;
}

Real dual_objective(Real z_source, Real theta) { return -std::log(z_source) / theta; }

namespace {

Real max_constraint_residual(const Graph& g, const ConstraintSpec& cs, const Matrix& edge_flows,
                             const Vector& node_flows) {
    Real worst = 0;
    for (Index i : cs.nodes()) {
        auto succ = g.successors(i);
        auto q = cs.q_row(g, i);
        for (Index k = 0; k < g.out_degree(i); ++k) {
            const Real ratio = edge_flows(i, succ[k]) / node_flows[i];
            worst = std::max(worst, std::abs(ratio - q[k]));
        }
    }
    return worst;
}

// |sum_j q_ij (c'_ij - c_ij)|, worst over the constrained rows
Real max_centering_violation(const Graph& g, const ConstraintSpec& cs,
                             const std::vector<Real>& c_prime) {
    Real worst = 0;
    for (Index i : cs.nodes()) {
        auto q = cs.q_row(g, i);
        auto cost = g.edge_costs(i);
        const Index b = g.row_begin(i);
        Real acc = 0;
        for (Index k = 0; k < g.out_degree(i); ++k)
            acc += q[k] * (c_prime[static_cast<size_t>(b + k)] - cost[k]);
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

} // namespace

DualSolveResult solve_constrained_dual(const Graph& g, const ReferenceChain& rc,
                                       const ConstraintSpec& cs, const RspParams& params) {
    params.check();
    DualSolveResult out;
    out.costs.c_prime.assign(g.costs().begin(), g.costs().end());
    out.costs.delta.assign(static_cast<size_t>(g.edge_count()), 0.0);
    out.costs.lambda.assign(static_cast<size_t>(g.edge_count()), 0.0);

    // No constraints: the problem is the standard RSP, no sweeps needed.
    if (cs.empty()) {
        out.solution = solve_standard(g, rc, params);
        out.solution.iterations = 0;
        return out;
    }

    auto build_w_checked = [&](const std::vector<Real>& costs) {
        WMatrix w = build_w(g, rc, costs, params);
        if (w.underflow) throw UnderflowAtThetaError(params.theta);
        return w;
    };
    // validated inputs guarantee goal reachability, so a breakdown of the
    // backward solve under the augmented costs is a numeric range problem of
    // the linear route, not a structural one
    auto backward_checked = [&](const WMatrix& w) {
        try {
            return backward_variables(w);
        } catch (const NotAbsorbingError&) {
            throw UnderflowAtThetaError(params.theta);
        }
    };

    Vector phi_prev;
    Vector phi = Vector::Zero(g.size());
    Real delta_sweep = std::numeric_limits<Real>::infinity();
    Index sweeps = 0;
    bool converged = false;

    while (sweeps < params.max_iter) {
        ++sweeps;
        for (Index i : cs.nodes()) {
            if (g.out_degree(i) <= 1) continue; // Delta is identically zero
            WMatrix w = build_w_checked(out.costs.c_prime);
            Vector z_b = backward_checked(w);
            phi = free_energy(z_b, params.theta, g.goal());
            std::vector<Real> row = update_augmented_costs(i, phi, g, rc);
            const Index b = g.row_begin(i);
            for (Index k = 0; k < g.out_degree(i); ++k)
                out.costs.c_prime[static_cast<size_t>(b + k)] = row[static_cast<size_t>(k)];
        }

        // end-of-sweep diagnostics on the fresh augmented costs
        WMatrix w = build_w_checked(out.costs.c_prime);
        Vector z_b = backward_checked(w);
        phi = free_energy(z_b, params.theta, g.goal());
        Vector z_f = forward_variables(w, g.source());
        auto [flows, node_flows] = edge_node_flows(w, z_f, z_b, g.source());
        out.trace.dual_objective.push_back(dual_objective(z_b[g.source()], params.theta));
        out.trace.constraint_residual.push_back(max_constraint_residual(g, cs, flows, node_flows));
        out.trace.centering_violation.push_back(max_centering_violation(g, cs, out.costs.c_prime));
        log::debug("dual sweep ", sweeps, ": objective=", out.trace.dual_objective.back(),
                   " residual=", out.trace.constraint_residual.back());

        if (phi_prev.size() > 0) {
            delta_sweep = (phi - phi_prev).cwiseAbs().maxCoeff();
            if (delta_sweep < params.tol) {
                converged = true;
            }
        }
        phi_prev = phi;
        if (converged) break;
    }
    if (!converged)
        throw MaxIterExceededError("constrained dual solver did not converge", sweeps,
                                   delta_sweep);

    // final assembly from the converged augmented costs
    WMatrix w = build_w_checked(out.costs.c_prime);
    RspSolution& sol = out.solution;
    sol.z_b = backward_checked(w);
    sol.phi = free_energy(sol.z_b, params.theta, g.goal());
    sol.policy = policy_from_free_energy(g, rc, out.costs.c_prime, sol.phi, params.theta, cs);
    Vector z_f = forward_variables(w, g.source());
    std::tie(sol.edge_flows, sol.node_flows) = edge_node_flows(w, z_f, sol.z_b, g.source());
    sol.expected_cost = expected_cost(g, sol.edge_flows);
    PathEntropies h = path_entropies(g, sol.policy, sol.node_flows,
                                     std::log(sol.z_b[g.source()]), params.theta,
                                     sol.expected_cost);
    sol.rel_entropy = h.rel_entropy;
    sol.total_entropy = h.total_entropy;
    sol.iterations = sweeps;
    sol.residual = delta_sweep;
    sol.converged = true;

    // multipliers and extra costs on constrained rows (lambda up to a shift)
    for (Index i : cs.nodes()) {
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        const Index b = g.row_begin(i);
        for (Index k = 0; k < g.out_degree(i); ++k) {
            const size_t e = static_cast<size_t>(b + k);
            out.costs.delta[e] = out.costs.c_prime[e] - cost[k];
            out.costs.lambda[e] = -(cost[k] + sol.phi[succ[k]]);
        }
    }
    return out;
}

} // namespace rsp
