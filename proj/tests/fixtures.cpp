#include "fixtures.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "rsp/constrained.hpp"

namespace fixtures {

using rsp::Edge;

Triple line3() {
    Graph g(3, 2, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}, {0, 2, 3.0, 1.0}});
    ReferenceChain rc = rsp::build_reference_chain(g);
    return {std::move(g), std::move(rc), ConstraintSpec{}};
}

Triple random_dag(std::uint64_t seed, Index n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> cost(0.1, 3.0);
    std::uniform_real_distribution<Real> affinity(0.5, 2.0);
    std::uniform_real_distribution<Real> coin(0.0, 1.0);

    std::vector<Edge> edges;
    for (Index i = 0; i + 1 < n; ++i) {
        // one guaranteed forward edge keeps the goal reachable from everywhere
        std::uniform_int_distribution<Index> pick(i + 1, n - 1);
        std::set<Index> targets{pick(rng)};
        for (Index j = i + 1; j < n; ++j)
            if (coin(rng) < 0.45) targets.insert(j);
        for (Index j : targets) edges.push_back({i, j, cost(rng), affinity(rng)});
    }
    Graph g(n, n - 1, std::move(edges));
    ReferenceChain rc = rsp::build_reference_chain(g);
    return {std::move(g), std::move(rc), ConstraintSpec{}};
}

Triple random_constrained(std::uint64_t seed, Index n) {
    std::mt19937_64 rng(seed);
    // cost scale keeps theta*phi moderate up to theta = 10, where the dual
    // solver's linear route must still be in floating-point range
    std::uniform_real_distribution<Real> cost(0.1, 1.5);
    std::uniform_real_distribution<Real> affinity(0.5, 2.0);
    std::uniform_real_distribution<Real> coin(0.0, 1.0);

    const Index goal = n - 1;
    std::vector<std::set<Index>> targets(static_cast<size_t>(n));
    // a random tree oriented toward the goal guarantees reachability
    for (Index i = 0; i < goal; ++i) {
        std::uniform_int_distribution<Index> pick(i + 1, goal);
        targets[static_cast<size_t>(i)].insert(pick(rng));
    }
    // extra edges in any direction, cycles welcome
    for (Index i = 0; i < goal; ++i)
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (coin(rng) < 0.35) targets[static_cast<size_t>(i)].insert(j);
        }

    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i)
        for (Index j : targets[static_cast<size_t>(i)])
            edges.push_back({i, j, cost(rng), affinity(rng)});
    Graph g(n, goal, std::move(edges));
    ReferenceChain rc = rsp::build_reference_chain(g);

    std::vector<Index> constrained;
    for (Index i = 0; i < goal; ++i)
        if (coin(rng) < 0.4) constrained.push_back(i);

    std::vector<Real> q(rc.values().begin(), rc.values().end());
    for (Index i = 0; i < n; ++i) {
        const bool keep = std::find(constrained.begin(), constrained.end(), i) != constrained.end();
        if (keep) continue;
        const Index b = g.row_begin(i);
        for (Index k = 0; k < g.out_degree(i); ++k) q[static_cast<size_t>(b + k)] = 0.0;
    }
    ConstraintSpec cs(g, std::move(constrained), std::move(q));
    return {std::move(g), std::move(rc), std::move(cs)};
}

MdpSpec random_mdp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> n_pick(4, 8); // including the goal
    std::uniform_int_distribution<int> act_pick(2, 3);
    std::uniform_real_distribution<Real> cost(0.1, 2.0);
    std::uniform_real_distribution<Real> coin(0.0, 1.0);

    MdpSpec mdp;
    mdp.n_states = n_pick(rng);
    mdp.goal = mdp.n_states - 1;
    mdp.actions.resize(static_cast<size_t>(mdp.n_states));

    for (Index k = 0; k < mdp.goal; ++k) {
        const int n_actions = act_pick(rng);
        for (int a = 0; a < n_actions; ++a) {
            rsp::MdpAction act;
            act.id = a;
            act.cost = cost(rng);
            // 1..3 outcome states; one of them biased toward the goal side
            std::set<Index> outs;
            std::uniform_int_distribution<Index> forward(k + 1, mdp.goal);
            outs.insert(forward(rng));
            std::uniform_int_distribution<Index> any(0, mdp.goal);
            const int extra = static_cast<int>(coin(rng) * 2.999);
            for (int e = 0; e < extra; ++e) outs.insert(any(rng));
            std::vector<Real> weights;
            Real total = 0;
            for (size_t o = 0; o < outs.size(); ++o) {
                weights.push_back(0.2 + coin(rng));
                total += weights.back();
            }
            size_t o = 0;
            for (Index l : outs) act.next.emplace_back(l, weights[o++] / total);
            mdp.actions[static_cast<size_t>(k)].push_back(std::move(act));
        }
    }
    mdp.resolve_priors();
    return mdp;
}

Triple permuted(const Triple& t, const std::vector<Index>& perm) {
    const Graph& g = t.graph;
    std::vector<Edge> edges;
    std::vector<std::pair<Index, Index>> constrained_edges; // (new_from, new_to) of q support
    for (Index i = 0; i < g.size(); ++i) {
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        auto aff = g.affinities(i);
        for (Index k = 0; k < g.out_degree(i); ++k)
            edges.push_back({perm[static_cast<size_t>(i)], perm[static_cast<size_t>(succ[k])],
                             cost[k], aff[k]});
    }
    Graph g2(g.size(), perm[static_cast<size_t>(g.goal())], std::move(edges),
             perm[static_cast<size_t>(g.source())]);

    std::vector<Real> p2(static_cast<size_t>(g2.edge_count()), 0.0);
    std::vector<Real> q2(static_cast<size_t>(g2.edge_count()), 0.0);
    for (Index i = 0; i < g.size(); ++i) {
        auto succ = g.successors(i);
        const Index b = g.row_begin(i);
        for (Index k = 0; k < g.out_degree(i); ++k) {
            const Index e2 = g2.edge_index(perm[static_cast<size_t>(i)],
                                           perm[static_cast<size_t>(succ[k])]);
            p2[static_cast<size_t>(e2)] = t.chain[b + k];
            q2[static_cast<size_t>(e2)] = t.constraints.q_values()[static_cast<size_t>(b + k)];
        }
    }
    std::vector<Index> cnodes;
    for (Index i : t.constraints.nodes()) cnodes.push_back(perm[static_cast<size_t>(i)]);
    ReferenceChain rc2(g2, std::move(p2));
    ConstraintSpec cs2(g2, std::move(cnodes), std::move(q2));
    return {std::move(g2), std::move(rc2), std::move(cs2)};
}

std::vector<std::vector<Real>> extract_mdp_policy(const rsp::BipartiteRsp& bip,
                                                  const rsp::Matrix& policy) {
    const Index n_states = bip.graph.goal() + 1; // states come first, the goal is the last one
    std::vector<std::vector<Real>> probs(static_cast<size_t>(n_states));
    for (Index node = 0; node < static_cast<Index>(bip.action_nodes.size()); ++node) {
        auto [state, action] = bip.action_nodes[static_cast<size_t>(node)];
        auto& row = probs[static_cast<size_t>(state)];
        if (static_cast<Index>(row.size()) <= action) row.resize(static_cast<size_t>(action) + 1);
        row[static_cast<size_t>(action)] = policy(state, n_states + node);
    }
    return probs;
}

DualPoint dual_point(const Triple& t, const std::vector<Real>& lambda, Real theta) {
    using namespace rsp;
    const Graph& g = t.graph;
    std::vector<Real> c_prime(g.costs().begin(), g.costs().end());
    for (Index i : t.constraints.nodes()) {
        auto q = t.constraints.q_row(g, i);
        const Index b = g.row_begin(i);
        Real mean = 0;
        for (Index k = 0; k < g.out_degree(i); ++k)
            mean += q[k] * lambda[static_cast<size_t>(b + k)];
        for (Index k = 0; k < g.out_degree(i); ++k)
            c_prime[static_cast<size_t>(b + k)] += lambda[static_cast<size_t>(b + k)] - mean;
    }
    WMatrix w = build_w(g, t.chain, c_prime, RspParams::engine(theta));
    Vector z_b = backward_variables(w);
    Vector z_f = forward_variables(w, g.source());
    auto [flows, nodes] = edge_node_flows(w, z_f, z_b, g.source());
    return {dual_objective(z_b[g.source()], theta), std::move(flows), std::move(nodes)};
}

} // namespace fixtures
