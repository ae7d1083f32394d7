#include "rsp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "iteration_detail.hpp"
#include "rsp/log.hpp"

namespace rsp {

Index MdpSpec::action_count() const {
    Index total = 0;
    for (const auto& acts : actions) total += static_cast<Index>(acts.size());
    return total;
}

void MdpSpec::resolve_priors() {
    for (auto& acts : actions) {
        if (acts.empty()) continue;
        bool any_set = false;
        for (const auto& a : acts) any_set = any_set || a.prior >= 0;
        if (!any_set) {
            for (auto& a : acts) a.prior = 1.0 / static_cast<Real>(acts.size());
        }
    }
}

ValidationReport MdpSpec::validate() const {
    ValidationReport report;
    if (n_states < 1) throw Error("MDP needs at least one state");
    if (goal != n_states - 1) throw Error("the goal must be the last state");
    if (static_cast<Index>(actions.size()) != n_states)
        throw Error("actions must be given for every state");
    if (!actions[static_cast<size_t>(goal)].empty())
        throw Error("the goal state must have no actions");

    for (Index k = 0; k < n_states; ++k) {
        if (k == goal) continue;
        const auto& acts = actions[static_cast<size_t>(k)];
        if (acts.empty()) throw DanglingNodeError(k + 1);
        Real prior_sum = 0;
        for (const auto& a : acts) {
            if (!(a.cost >= 0) || !std::isfinite(a.cost))
                throw Error("negative action cost in state " + std::to_string(k + 1));
            if (a.prior < 0) throw Error("unresolved prior; call resolve_priors() first");
            prior_sum += a.prior;
            Real env_sum = 0;
            for (auto [l, p] : a.next) {
                if (l < 0 || l >= n_states) throw Error("environment target out of range");
                if (!(p > 0)) throw Error("environment probabilities must be positive");
                env_sum += p;
            }
            if (std::abs(env_sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "environment row of state " << k + 1 << " action " << a.id << " sums to "
                   << env_sum;
                report.issues.push_back({ValidationIssue::Code::RowSumNotOne, k, -1, os.str()});
            }
        }
        if (std::abs(prior_sum - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "prior over actions of state " << k + 1 << " sums to " << prior_sum;
            report.issues.push_back({ValidationIssue::Code::RowSumNotOne, k, -1, os.str()});
        }
    }

    // goal reachability under the support of env o prior
    std::vector<char> reached(static_cast<size_t>(n_states), 0);
    std::vector<Index> stack{goal};
    reached[static_cast<size_t>(goal)] = 1;
    std::vector<std::vector<Index>> rev(static_cast<size_t>(n_states));
    for (Index k = 0; k < n_states; ++k)
        for (const auto& a : actions[static_cast<size_t>(k)])
            for (auto [l, p] : a.next) rev[static_cast<size_t>(l)].push_back(k);
    while (!stack.empty()) {
        Index v = stack.back();
        stack.pop_back();
        for (Index u : rev[static_cast<size_t>(v)])
            if (!reached[static_cast<size_t>(u)]) {
                reached[static_cast<size_t>(u)] = 1;
                stack.push_back(u);
            }
    }
    for (Index k = 0; k < n_states; ++k)
        if (!reached[static_cast<size_t>(k)])
            report.issues.push_back({ValidationIssue::Code::Unreachable, k, -1, {}});
    return report;
}

BipartiteRsp to_bipartite(const MdpSpec& mdp) {
    const Index n_s = mdp.n_states;
    const Index n_a = mdp.action_count();
    const Index n = n_s + n_a;

    std::vector<Edge> edges;
    std::vector<Real> pref;
    std::vector<std::pair<Index, Index>> action_nodes;
    std::vector<Index> constrained;
    action_nodes.reserve(static_cast<size_t>(n_a));

    Index node = n_s;
    for (Index k = 0; k < n_s; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        for (Index a = 0; a < static_cast<Index>(acts.size()); ++a, ++node) {
            const MdpAction& act = acts[static_cast<size_t>(a)];
            edges.push_back({k, node, act.cost, act.prior});
            pref.push_back(act.prior);
            action_nodes.emplace_back(k, a);
            constrained.push_back(node);
            for (auto [l, p] : act.next) {
                edges.push_back({node, l, 0.0, p});
                pref.push_back(p);
            }
        }
    }

    // CSR order is (from, to); rebuild the aligned p_ref and q arrays after sorting
    std::vector<size_t> order(edges.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        return edges[x].from != edges[y].from ? edges[x].from < edges[y].from
                                              : edges[x].to < edges[y].to;
    });
    std::vector<Edge> sorted_edges;
    std::vector<Real> sorted_pref;
    sorted_edges.reserve(edges.size());
    for (size_t i : order) {
        sorted_edges.push_back(edges[i]);
        sorted_pref.push_back(pref[i]);
    }

    Graph g(n, mdp.goal, std::move(sorted_edges), /*source=*/0);
    ReferenceChain rc(g, std::move(sorted_pref));
    // every action node is constrained to the environment distribution
    std::vector<Real> q(rc.values().begin(), rc.values().end());
    for (Index i = 0; i < n_s; ++i) {
        const Index b = g.row_begin(i);
        for (Index k = 0; k < g.out_degree(i); ++k) q[static_cast<size_t>(b + k)] = 0.0;
    }
    ConstraintSpec cs(g, std::move(constrained), std::move(q));
    return BipartiteRsp{std::move(g), std::move(rc), std::move(cs), std::move(action_nodes)};
}

namespace {

// action value x_ka = c_ka + sum_l p_al phi_l
Real action_value(const MdpAction& a, const Vector& phi) {
    Real v = a.cost;
    for (auto [l, p] : a.next) v += p * phi[l];
    return v;
}

std::vector<std::vector<Real>> logistic_policy(const MdpSpec& mdp, const Vector& phi, Real theta) {
    std::vector<std::vector<Real>> probs(static_cast<size_t>(mdp.n_states));
    for (Index k = 0; k < mdp.n_states; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        if (acts.empty()) continue;
        std::vector<Real>& row = probs[static_cast<size_t>(k)];
        row.resize(acts.size());
        Real shift = std::numeric_limits<Real>::infinity();
        for (const auto& a : acts) shift = std::min(shift, action_value(a, phi));
        Real total = 0;
        for (size_t a = 0; a < acts.size(); ++a) {
            row[a] = acts[a].prior * std::exp(-theta * (action_value(acts[a], phi) - shift));
            total += row[a];
        }
        for (Real& p : row) p /= total;
    }
    return probs;
}

} // namespace

MdpPolicy soft_value_iteration(const MdpSpec& mdp, const RspParams& params) {
    params.check();
    Vector phi = Vector::Zero(mdp.n_states);
    Vector next = Vector::Zero(mdp.n_states);
    detail::ConvergenceMonitor monitor(params.tol);
    Index iterations = 0;
    Real delta = std::numeric_limits<Real>::infinity();
    bool done = false;
    for (Index it = 1; it <= params.max_iter && !done; ++it) {
        for (Index k = 0; k < mdp.n_states; ++k) {
            if (k == mdp.goal) {
                next[k] = 0.0;
                continue;
            }
            const auto& acts = mdp.actions[static_cast<size_t>(k)];
            Real shift = std::numeric_limits<Real>::infinity();
            for (const auto& a : acts) shift = std::min(shift, action_value(a, phi));
            Real acc = 0;
            for (const auto& a : acts)
                acc += a.prior * std::expm1(-params.theta * (action_value(a, phi) - shift));
            next[k] = shift - std::log1p(acc) / params.theta;
        }
        delta = (next - phi).cwiseAbs().maxCoeff();
        phi.swap(next);
        iterations = it;
        done = monitor.done(delta, phi.cwiseAbs().maxCoeff());
    }
    if (!done)
        throw MaxIterExceededError("soft value iteration did not converge", iterations, delta);

    MdpPolicy out;
    out.values = phi;
    out.probs = logistic_policy(mdp, phi, params.theta);
    out.iterations = iterations;
    out.residual = delta;
    return out;
}

MdpPolicy standard_value_iteration(const MdpSpec& mdp, const RspParams& params) {
    if (!(params.tol > 0) || params.max_iter < 1) throw Error("bad iteration parameters");
    Vector v = Vector::Zero(mdp.n_states);
    Vector next = Vector::Zero(mdp.n_states);
    detail::ConvergenceMonitor monitor(params.tol);
    Index iterations = 0;
    Real delta = std::numeric_limits<Real>::infinity();
    bool done = false;
    for (Index it = 1; it <= params.max_iter && !done; ++it) {
        for (Index k = 0; k < mdp.n_states; ++k) {
            if (k == mdp.goal) {
                next[k] = 0.0;
                continue;
            }
            Real best = std::numeric_limits<Real>::infinity();
            for (const auto& a : mdp.actions[static_cast<size_t>(k)])
                best = std::min(best, action_value(a, v));
            next[k] = best;
        }
        delta = (next - v).cwiseAbs().maxCoeff();
        v.swap(next);
        iterations = it;
        done = monitor.done(delta, v.cwiseAbs().maxCoeff());
    }
    if (!done)
        throw MaxIterExceededError("standard value iteration did not converge", iterations, delta);

    MdpPolicy out;
    out.values = v;
    out.probs.resize(static_cast<size_t>(mdp.n_states));
    for (Index k = 0; k < mdp.n_states; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        if (acts.empty()) continue;
        Index argmin = 0;
        Real best = std::numeric_limits<Real>::infinity();
        for (size_t a = 0; a < acts.size(); ++a) {
            const Real q = action_value(acts[a], v);
            if (q < best) { // strict: ties go to the lowest action index
                best = q;
                argmin = static_cast<Index>(a);
            }
        }
        out.probs[static_cast<size_t>(k)].assign(acts.size(), 0.0);
        out.probs[static_cast<size_t>(k)][static_cast<size_t>(argmin)] = 1.0;
    }
    out.iterations = iterations;
    out.residual = delta;
    return out;
}

Vector expected_first_passage_cost(const MdpSpec& mdp,
                                   const std::vector<std::vector<Real>>& policy) {
    const Index n = mdp.n_states;
    Matrix m = Matrix::Zero(n, n); // state-to-state chain under the policy
    Vector r = Vector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        for (size_t a = 0; a < acts.size(); ++a) {
            const Real pa = policy[static_cast<size_t>(k)][a];
            r[k] += pa * acts[a].cost;
            for (auto [l, p] : acts[a].next) m(k, l) += pa * p;
        }
    }
    m.row(mdp.goal).setZero();
    r[mdp.goal] = 0.0;
    Matrix a = Matrix::Identity(n, n) - m;
    Vector phi = Eigen::PartialPivLU<Matrix>(a).solve(r);
    if (!phi.allFinite() ||
        (a * phi - r).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, phi.cwiseAbs().maxCoeff()))
        throw SingularSystemError("first-passage system is singular: goal unreachable under the "
                                  "policy support");
    phi[mdp.goal] = 0.0;
    return phi;
}

Vector state_visit_counts(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          Index source) {
    const Index n = mdp.n_states;
    Matrix m = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        for (size_t a = 0; a < acts.size(); ++a) {
            const Real pa = policy[static_cast<size_t>(k)][a];
            for (auto [l, p] : acts[a].next) m(k, l) += pa * p;
        }
    }
    m.row(mdp.goal).setZero();
    Matrix a = Matrix::Identity(n, n) - m.transpose();
    Vector rhs = Vector::Zero(n);
    rhs[source] = 1.0;
    Vector counts = Eigen::PartialPivLU<Matrix>(a).solve(rhs);
    if (!counts.allFinite() ||
        (a * counts - rhs).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, counts.cwiseAbs().maxCoeff()))
        throw SingularSystemError("visit-count system is singular");
    counts[mdp.goal] = 1.0;
    return counts;
}

Real state_policy_entropy(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          Index source) {
    Vector counts = state_visit_counts(mdp, policy, source);
    Real total = 0;
    for (Index k = 0; k < mdp.n_states; ++k) {
        if (k == mdp.goal) continue;
        Real h = 0;
        for (Real p : policy[static_cast<size_t>(k)])
            if (p > 0) h -= p * std::log(p);
        total += counts[k] * h;
    }
    return total;
}

std::vector<Index> greedy_trace(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                                Index source, Index max_len) {
    std::vector<Index> path{source};
    Index state = source;
    while (state != mdp.goal && static_cast<Index>(path.size()) < max_len) {
        const auto& acts = mdp.actions[static_cast<size_t>(state)];
        const auto& row = policy[static_cast<size_t>(state)];
        const size_t best =
            static_cast<size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        // most likely environment outcome, lowest state id on ties
        Index next = -1;
        Real best_p = -1;
        for (auto [l, p] : acts[best].next)
            if (p > best_p || (p == best_p && l < next)) {
                best_p = p;
                next = l;
            }
        path.push_back(next);
        if (next == state) break; // self-transition loop, stop rather than spin
        state = next;
    }
    return path;
}

} // namespace rsp
