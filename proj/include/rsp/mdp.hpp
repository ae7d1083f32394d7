#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rsp/engine.hpp"
#include "rsp/graph.hpp"

namespace rsp {

struct MdpAction {
    int id = 0;
    Real cost = 0;
    std::vector<std::pair<Index, Real>> next; // environment distribution over states
    Real prior = -1;                          // reference policy mass; -1 = uniform default
};

/**
 * Stochastic shortest-path MDP: states 0..n_states-1, the goal is the last
 * state and has no actions, every other state has at least one action with a
 * non-negative cost and an environment distribution over next states provided
 * by the environment. The optional prior is the reference policy (uniform when
 * omitted).
 */
struct MdpSpec {
    Index n_states = 0;
    Index goal = 0;
    std::vector<std::vector<MdpAction>> actions; // indexed by state; empty at the goal

    Index action_count() const;
    /// Resolves -1 priors to the uniform distribution, in place.
    void resolve_priors();
    /// Throws on structural violations; returns warnings-only report otherwise.
    ValidationReport validate() const;
};

struct MdpPolicy {
    std::vector<std::vector<Real>> probs; // per state, aligned with MdpSpec actions
    Vector values;                        // phi (soft) or v (standard)
    Index iterations = 0;
    Real residual = 0;
};

struct BipartiteRsp {
    Graph graph;
    ReferenceChain chain;
    ConstraintSpec constraints;
    /// action node id -> (state, action position) in the MdpSpec
    std::vector<std::pair<Index, Index>> action_nodes;
};

/**
 * The MDP as a constrained RSP on a bipartite graph: state nodes first
 * (0..n_S-1), then one node per (state, action) pair. State->action edges
 * carry the action cost and the prior probability; action->state edges carry
 * zero cost and the environment distribution, and every action node is
 * constrained to it.
 */
BipartiteRsp to_bipartite(const MdpSpec& mdp);

/**
 * Soft value iteration on state free energies:
 *
 *  phi_k = -(1/theta) log sum_a p_ka exp[-theta (c_ka + sum_l p_al phi_l)]
 *
 * with phi pinned to zero at the goal; the randomized policy is the
 * multinomial logistic of the action values. Iterated synchronously from
 * phi = 0 with the same contraction-corrected stopping as the graph solvers.
 */
MdpPolicy soft_value_iteration(const MdpSpec& mdp, const RspParams& params);

/// Classic value iteration (Bellman-Ford); ties broken toward the lowest
/// action index, the returned policy is deterministic 0/1.
MdpPolicy standard_value_iteration(const MdpSpec& mdp, const RspParams& params);

/// Expected cost to absorption under an arbitrary stochastic policy, from the
/// linear recurrence phi_k = sum_a p_ka (c_ka + sum_l p_al phi_l), phi_goal=0.
Vector expected_first_passage_cost(const MdpSpec& mdp,
                                   const std::vector<std::vector<Real>>& policy);

/// Expected visit counts per state starting from `source` under the policy.
Vector state_visit_counts(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          Index source = 0);

/// Visit-weighted Shannon entropy of the per-state action distributions.
Real state_policy_entropy(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          Index source = 0);

/// Most likely successor trace from `source` following the per-state argmax
/// action (ties toward the lower index), capped at `max_len` states.
std::vector<Index> greedy_trace(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                                Index source = 0, Index max_len = 64);

} // namespace rsp
