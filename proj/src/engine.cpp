#include "rsp/engine.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "iteration_detail.hpp"
#include "rsp/log.hpp"

namespace rsp {

void RspParams::check() const {
    if (!(theta > 0)) throw Error("theta must be positive");
    if (!(tol > 0)) throw Error("tol must be positive");
    if (max_iter < 1) throw Error("max_iter must be at least 1");
}

WMatrix build_w(const Graph& g, const ReferenceChain& rc, std::span<const Real> costs,
                const RspParams& params) {
    params.check();
    WMatrix w;
    w.n = g.size();
    w.goal = g.goal();
    w.is_dense = g.size() <= kDenseNodeLimit;

    std::vector<Eigen::Triplet<Real>> triplets;
    if (!w.is_dense) triplets.reserve(static_cast<size_t>(g.edge_count()));
    if (w.is_dense) w.dense = Matrix::Zero(w.n, w.n);

    for (Index i = 0; i < g.size(); ++i) {
        if (i == g.goal()) continue;
        auto succ = g.successors(i);
        const Index b = g.row_begin(i);
        for (Index k = 0; k < g.out_degree(i); ++k) {
            const Real p = rc[b + k];
            if (p <= 0) continue;
            const Real v = p * std::exp(-params.theta * costs[static_cast<size_t>(b + k)]);
            if (v == 0) w.underflow = true;
            if (w.is_dense)
                w.dense(i, succ[k]) = v;
            else
                triplets.emplace_back(i, succ[k], v);
        }
    }
    if (!w.is_dense) {
        w.sparse.resize(w.n, w.n);
        w.sparse.setFromTriplets(triplets.begin(), triplets.end());
    }
    return w;
}

namespace {

Vector solve_i_minus(const WMatrix& w, const Vector& rhs, bool transpose) {
    Vector z;
    if (w.is_dense) {
        Matrix a = Matrix::Identity(w.n, w.n);
        if (transpose)
            a -= w.dense.transpose();
        else
            a -= w.dense;
        z = Eigen::PartialPivLU<Matrix>(a).solve(rhs);
        if (!z.allFinite() || (a * z - rhs).cwiseAbs().maxCoeff() > 1e-8)
            throw NotAbsorbingError("(I - W) system is singular or badly conditioned; goal "
                                    "unreachable under the support of W");
        return z;
    }
    SparseMatrix a(w.n, w.n);
    a.setIdentity();
    if (transpose)
        a = a - SparseMatrix(w.sparse.transpose());
    else
        a = a - w.sparse;
    Eigen::BiCGSTAB<SparseMatrix> solver;
    solver.setTolerance(1e-13);
    solver.setMaxIterations(20 * w.n);
    solver.compute(a);
    z = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !z.allFinite())
        throw NotAbsorbingError("sparse (I - W) solve failed; goal unreachable under the "
                                "support of W");
    return z;
}

} // namespace

Vector backward_variables(const WMatrix& w) {
    Vector rhs = Vector::Zero(w.n);
    rhs[w.goal] = 1.0;
    Vector z = solve_i_minus(w, rhs, /*transpose=*/false);
    if ((z.array() <= 0).any())
        throw NotAbsorbingError("backward variables are not strictly positive; goal unreachable "
                                "under the support of W");
    return z;
}

Vector forward_variables(const WMatrix& w, Index source) {
    Vector rhs = Vector::Zero(w.n);
    rhs[source] = 1.0;
    return solve_i_minus(w, rhs, /*transpose=*/true);
}

Vector free_energy(const Vector& z_b, Real theta, Index goal) {
    Vector phi = -(z_b.array().log()) / theta;
    phi[goal] = 0.0;
    return phi;
}

Matrix optimal_policy(const WMatrix& w, const Vector& z_b) {
    if (!w.is_dense) throw Error("policy assembly requires the dense path");
    Matrix p = Matrix::Zero(w.n, w.n);
    for (Index i = 0; i < w.n; ++i) {
        if (i == w.goal) continue;
        p.row(i) = w.dense.row(i).cwiseProduct(z_b.transpose()) / z_b[i];
    }
    return p;
}

Matrix policy_from_free_energy(const Graph& g, const ReferenceChain& rc,
                               std::span<const Real> costs, const Vector& phi, Real theta,
                               const ConstraintSpec& cs) {
    if (g.size() > kDenseNodeLimit) throw Error("policy assembly requires the dense path");
    Matrix p = Matrix::Zero(g.size(), g.size());
    for (Index i = 0; i < g.size(); ++i) {
        if (i == g.goal()) continue;
        auto succ = g.successors(i);
        const Index b = g.row_begin(i);
        if (cs.is_constrained(i)) {
            auto q = cs.q_row(g, i);
            for (Index k = 0; k < g.out_degree(i); ++k) p(i, succ[k]) = q[k];
            continue;
        }
        // max-shifted multinomial logistic over the successors
        Real shift = std::numeric_limits<Real>::infinity();
        for (Index k = 0; k < g.out_degree(i); ++k) {
            if (rc[b + k] <= 0) continue;
            shift = std::min(shift, costs[static_cast<size_t>(b + k)] + phi[succ[k]]);
        }
        Real total = 0;
        for (Index k = 0; k < g.out_degree(i); ++k) {
            if (rc[b + k] <= 0) continue;
            const Real x = costs[static_cast<size_t>(b + k)] + phi[succ[k]];
            const Real v = rc[b + k] * std::exp(-theta * (x - shift));
            p(i, succ[k]) = v;
            total += v;
        }
        for (Index k = 0; k < g.out_degree(i); ++k) p(i, succ[k]) /= total;
    }
    return p;
}

std::pair<Matrix, Vector> edge_node_flows(const WMatrix& w, const Vector& z_forward,
                                          const Vector& z_backward, Index source) {
    if (!w.is_dense) throw Error("flow assembly requires the dense path");
    const Real z = z_backward[source];
    Matrix flows =
        (z_forward * z_backward.transpose()).cwiseProduct(w.dense) / z;
    Vector node = z_forward.cwiseProduct(z_backward) / z;
    node[w.goal] = 1.0; // absorbed exactly once
    return {std::move(flows), std::move(node)};
}

std::pair<Matrix, Vector> flows_from_policy(const Graph& g, const Matrix& policy, Index source) {
    Matrix a = Matrix::Identity(g.size(), g.size()) - policy.transpose();
    Vector rhs = Vector::Zero(g.size());
    rhs[source] = 1.0;
    Vector m = Eigen::PartialPivLU<Matrix>(a).solve(rhs);
    if (!m.allFinite() || (a * m - rhs).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw SingularSystemError("visit-count system is singular: goal unreachable under the "
                                  "policy support");
    Matrix flows = m.asDiagonal() * policy;
    m[g.goal()] = 1.0;
    return {std::move(flows), std::move(m)};
}

Real expected_cost(const Graph& g, const Matrix& edge_flows) {
    Real total = 0;
    for (Index i = 0; i < g.size(); ++i) {
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        for (Index k = 0; k < g.out_degree(i); ++k) total += edge_flows(i, succ[k]) * cost[k];
    }
    return total;
}

PathEntropies path_entropies(const Graph& g, const Matrix& policy, const Vector& node_flows,
                             Real log_z_source, Real theta, Real expected_cost) {
    PathEntropies out;
    out.rel_entropy = -(log_z_source + theta * expected_cost);
    Real total = 0;
    for (Index i = 0; i < g.size(); ++i) {
        if (i == g.goal()) continue;
        Real h = 0;
        for (Index j : g.successors(i)) {
            const Real p = policy(i, j);
            if (p > 0) h -= p * std::log(p);
        }
        total += node_flows[i] * h;
    }
    out.total_entropy = total;
    return out;
}

IterationResult soft_bellman_ford(const Graph& g, const ReferenceChain& rc,
                                  std::span<const Real> costs, const RspParams& params) {
    params.check();
    Vector phi = Vector::Zero(g.size());
    Vector next = Vector::Zero(g.size());
    detail::ConvergenceMonitor monitor(params.tol);
    Real prev_delta = std::numeric_limits<Real>::infinity();
    bool warned_nonmonotone = false;
    for (Index it = 1; it <= params.max_iter; ++it) {
        for (Index i = 0; i < g.size(); ++i) {
            if (i == g.goal()) {
                next[i] = 0.0;
                continue;
            }
            auto succ = g.successors(i);
            const Index b = g.row_begin(i);
            Real shift = std::numeric_limits<Real>::infinity();
            for (Index k = 0; k < g.out_degree(i); ++k)
                if (rc[b + k] > 0)
                    shift = std::min(shift, costs[static_cast<size_t>(b + k)] + phi[succ[k]]);
            Real acc = 0;
            for (Index k = 0; k < g.out_degree(i); ++k) {
                if (rc[b + k] <= 0) continue;
                const Real x = costs[static_cast<size_t>(b + k)] + phi[succ[k]];
                acc += rc[b + k] * std::expm1(-params.theta * (x - shift));
            }
            next[i] = shift - std::log1p(acc) / params.theta;
        }
        const Real delta = (next - phi).cwiseAbs().maxCoeff();
        phi.swap(next);
        if (it > 5 && delta > prev_delta && !warned_nonmonotone) {
            log::warn("soft_bellman_ford: residual increased at iteration ", it, " (", prev_delta,
                      " -> ", delta, ")");
            warned_nonmonotone = true;
        }
        prev_delta = delta;
        if (monitor.done(delta, phi.cwiseAbs().maxCoeff())) return {std::move(phi), it, delta};
    }
    throw MaxIterExceededError("soft_bellman_ford did not converge", params.max_iter, prev_delta);
}

RspSolution solve_standard(const Graph& g, const ReferenceChain& rc, const RspParams& params) {
    params.check();
    RspSolution sol;
    WMatrix w = build_w(g, rc, g.costs(), params);
    if (!w.underflow) {
        sol.z_b = backward_variables(w);
        sol.phi = free_energy(sol.z_b, params.theta, g.goal());
        sol.policy = optimal_policy(w, sol.z_b);
        Vector z_f = forward_variables(w, g.source());
        std::tie(sol.edge_flows, sol.node_flows) = edge_node_flows(w, z_f, sol.z_b, g.source());
        sol.iterations = 0;
        sol.residual = 0;
    } else {
        // log-domain route: the softmin recursion never forms W
        log::info("solve_standard: exp underflow at theta=", params.theta,
                  ", using the soft Bellman-Ford route");
        IterationResult it = soft_bellman_ford(g, rc, g.costs(), params);
        sol.phi = std::move(it.phi);
        sol.z_b = (-params.theta * sol.phi.array()).exp();
        sol.policy = policy_from_free_energy(g, rc, g.costs(), sol.phi, params.theta);
        std::tie(sol.edge_flows, sol.node_flows) = flows_from_policy(g, sol.policy, g.source());
        sol.iterations = it.iterations;
        sol.residual = it.residual;
    }
    sol.expected_cost = expected_cost(g, sol.edge_flows);
    const Real log_z = -params.theta * sol.phi[g.source()];
    PathEntropies h = path_entropies(g, sol.policy, sol.node_flows, log_z, params.theta,
                                     sol.expected_cost);
    sol.rel_entropy = h.rel_entropy;
    sol.total_entropy = h.total_entropy;
    sol.converged = true;
    return sol;
}

} // namespace rsp
