#pragma once

// Deterministic fixtures shared by the unit and acceptance suites.

#include <cstdint>
#include <vector>

#include "rsp/graph.hpp"
#include "rsp/mdp.hpp"

namespace fixtures {

using rsp::ConstraintSpec;
using rsp::Graph;
using rsp::Index;
using rsp::MdpSpec;
using rsp::Real;
using rsp::ReferenceChain;

struct Triple {
    Graph graph;
    ReferenceChain chain;
    ConstraintSpec constraints;
};

/// Nodes 1->2 (cost 1), 2->3 (cost 1), 1->3 (cost 3), unit affinities, goal 3.
Triple line3();

/// Random DAG on n <= 12 nodes (edges only point forward, every node reaches
/// the goal), costs in [0.1, 3], affinities in [0.5, 2]. No constraints.
Triple random_dag(std::uint64_t seed, Index n);

/// Random goal-reachable directed graph (cycles allowed) with a random subset
/// of nodes constrained to q = p_ref.
Triple random_constrained(std::uint64_t seed, Index n);

/// Random MDP: 3..7 non-goal states, 2..3 actions each, environment rows over
/// 1..3 states, goal reachable; costs in [0.1, 2].
MdpSpec random_mdp(std::uint64_t seed);

/// Relabels nodes by `perm` (old id -> new id); used to exercise a different
/// constrained-node sweep order on the same underlying problem.
Triple permuted(const Triple& t, const std::vector<Index>& perm);

/// Reads the per-state action distributions out of a bipartite-graph policy.
std::vector<std::vector<Real>> extract_mdp_policy(const rsp::BipartiteRsp& bip,
                                                  const rsp::Matrix& policy);

/// Dual Lagrangian L*(lambda) = -(1/theta) log z'_source evaluated at an
/// arbitrary multiplier vector (per edge, only constrained rows used), plus
/// the flows entering its gradient. Drives the finite-difference checks.
struct DualPoint {
    Real objective;
    rsp::Matrix edge_flows;
    rsp::Vector node_flows;
};
DualPoint dual_point(const Triple& t, const std::vector<Real>& lambda, Real theta);

} // namespace fixtures
