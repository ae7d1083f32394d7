#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rsp/fixedpoint.hpp"
#include "rsp/mdp_io.hpp"
#include "rsp/sim.hpp"

using namespace rsp;

namespace {
std::string data_path(const char* name) { return std::string(RSP_TEST_DATA_DIR) + "/" + name; }
const std::vector<Index> kMazePath{0, 4, 7, 8, 9, 10}; // squares 1,5,8,9,10,11
} // namespace

TEST_CASE("the maze turns into an 11+40 node bipartite graph") {
    MdpSpec maze = build_maze();
    BipartiteRsp bip = to_bipartite(maze);
    CHECK(bip.graph.size() == 51);
    CHECK(bip.graph.goal() == 10); // state 11 keeps its id
    CHECK(bip.constraints.nodes().size() == 40);
    CHECK(bip.action_nodes.size() == 40);

    // bipartite block structure: states only reach action nodes and vice versa
    for (Index i = 0; i < bip.graph.size(); ++i) {
        const bool is_state = i < 11;
        for (Index j : bip.graph.successors(i)) {
            if (is_state)
                CHECK(j >= 11);
            else
                CHECK(j < 11);
        }
    }

    // action -> state edges carry zero cost; state -> action edges the action cost
    for (Index i = 11; i < bip.graph.size(); ++i)
        for (Real c : bip.graph.edge_costs(i)) CHECK(c == 0.0);
    ValidationReport report = validate(bip.graph, bip.chain, bip.constraints);
    CHECK(report.ok());
}

TEST_CASE("a one-state one-action MDP becomes a three-node chain") {
    MdpSpec mdp;
    mdp.n_states = 2;
    mdp.goal = 1;
    mdp.actions.resize(2);
    mdp.actions[0].push_back({0, 1.0, {{1, 1.0}}, -1});
    mdp.resolve_priors();
    BipartiteRsp bip = to_bipartite(mdp);
    CHECK(bip.graph.size() == 3);
    CHECK(bip.constraints.nodes().size() == 1);
    CHECK(bip.constraints.nodes()[0] == 2);
    RspSolution sol = solve_constrained_fixedpoint(bip.graph, bip.chain, bip.constraints,
                                                   RspParams::fixedpoint(1.0));
    CHECK(sol.phi[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("soft value iteration equals the bipartite constrained solve") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 5; ++trial) {
        MdpSpec mdp = fixtures::random_mdp(rng());
        BipartiteRsp bip = to_bipartite(mdp);
        for (Real theta : {0.1, 1.0, 10.0}) {
            MdpPolicy direct = soft_value_iteration(mdp, RspParams::fixedpoint(theta));
            RspSolution graph_solution = solve_constrained_fixedpoint(
                bip.graph, bip.chain, bip.constraints, RspParams::fixedpoint(theta));
            auto restricted = fixtures::extract_mdp_policy(bip, graph_solution.policy);
            for (Index k = 0; k < mdp.n_states; ++k) {
                const auto& a = direct.probs[static_cast<size_t>(k)];
                const auto& b = restricted[static_cast<size_t>(k)];
                REQUIRE(a.size() == b.size());
                for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
            }
            // state free energies agree as well
            for (Index k = 0; k < mdp.n_states; ++k)
                CHECK(std::abs(direct.values[k] - graph_solution.phi[k]) < 1e-8);
        }
    }
}

TEST_CASE("state visit counts agree between the direct and bipartite routes") {
    MdpSpec maze = build_maze();
    BipartiteRsp bip = to_bipartite(maze);
    const Real theta = 1.0;
    MdpPolicy policy = soft_value_iteration(maze, RspParams::fixedpoint(theta));
    Vector direct = state_visit_counts(maze, policy.probs);
    RspSolution sol = solve_constrained_fixedpoint(bip.graph, bip.chain, bip.constraints,
                                                   RspParams::fixedpoint(theta));
    for (Index k = 0; k < maze.n_states; ++k)
        CHECK(std::abs(direct[k] - sol.node_flows[k]) < 1e-7);
}

TEST_CASE("bipartite action-node free energies satisfy the substitution identity") {
    MdpSpec maze = build_maze();
    BipartiteRsp bip = to_bipartite(maze);
    RspSolution sol = solve_constrained_fixedpoint(bip.graph, bip.chain, bip.constraints,
                                                   RspParams::fixedpoint(1.0));
    // zero action->state costs make phi_action the env-average of state phi
    for (Index node = 11; node < bip.graph.size(); ++node) {
        auto succ = bip.graph.successors(node);
        const Index b = bip.graph.row_begin(node);
        Real expect = 0;
        for (Index k = 0; k < bip.graph.out_degree(node); ++k)
            expect += bip.chain[b + k] * sol.phi[succ[k]];
        CHECK(std::abs(sol.phi[node] - expect) < 1e-9);
    }
}

TEST_CASE("soft value iteration tends to the prior policy as theta -> 0") {
    MdpSpec maze = build_maze();
    MdpPolicy policy = soft_value_iteration(maze, RspParams::fixedpoint(1e-8));
    for (Index k = 0; k < maze.goal; ++k)
        for (Real p : policy.probs[static_cast<size_t>(k)])
            CHECK(std::abs(p - 0.25) < 1e-5);
}

TEST_CASE("soft value iteration at theta = 10^0.5 recovers the optimal route") {
    MdpSpec maze = build_maze();
    MdpPolicy policy = soft_value_iteration(maze, RspParams::fixedpoint(std::pow(10.0, 0.5)));
    CHECK(greedy_trace(maze, policy.probs) == kMazePath);

    MdpPolicy vi = standard_value_iteration(maze, RspParams::fixedpoint(1.0));
    for (Index k = 0; k < maze.goal; ++k) {
        const auto& soft = policy.probs[static_cast<size_t>(k)];
        const auto& hard = vi.probs[static_cast<size_t>(k)];
        const size_t soft_argmax =
            static_cast<size_t>(std::max_element(soft.begin(), soft.end()) - soft.begin());
        const size_t hard_argmax =
            static_cast<size_t>(std::max_element(hard.begin(), hard.end()) - hard.begin());
        CHECK(soft_argmax == hard_argmax);
    }
}

TEST_CASE("soft value iteration approaches standard value iteration as theta -> infinity") {
    MdpSpec maze = build_maze();
    MdpPolicy vi = standard_value_iteration(maze, RspParams::fixedpoint(1.0));

    // the gap decays like (expected decisions) * log(4) / theta
    MdpPolicy at100 = soft_value_iteration(maze, RspParams::fixedpoint(100.0));
    CHECK((at100.values - vi.values).cwiseAbs().maxCoeff() < 0.15);
    CHECK((at100.values - vi.values).cwiseAbs().maxCoeff() > 0.05); // genuinely not closer

    MdpPolicy at1e5 = soft_value_iteration(maze, RspParams::fixedpoint(1e5));
    CHECK((at1e5.values - vi.values).cwiseAbs().maxCoeff() < 1e-3);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 4; ++trial) {
        MdpSpec mdp = fixtures::random_mdp(rng());
        MdpPolicy soft = soft_value_iteration(mdp, RspParams::fixedpoint(1e5));
        MdpPolicy hard = standard_value_iteration(mdp, RspParams::fixedpoint(1.0));
        CHECK((soft.values - hard.values).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("standard value iteration finds the unique optimal route") {
    MdpSpec maze = build_maze();
    MdpPolicy vi = standard_value_iteration(maze, RspParams::fixedpoint(1.0));
    CHECK(greedy_trace(maze, vi.probs) == kMazePath);
    // frozen expected costs of the optimal policy (cross-checked analytically)
    Vector expect(11);
    expect << 5.625, 6.625, 7.625, 8.625, 4.25, 8.625, 9.625, 3.0, 2.0, 1.0, 0.0;
    CHECK((vi.values - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("standard value iteration on single-action MDPs is the first-passage cost") {
    MdpSpec chain = load_mdp_file(data_path("chain_mdp.json"));
    MdpPolicy vi = standard_value_iteration(chain, RspParams::fixedpoint(1.0));
    CHECK(vi.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(vi.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    Vector fp = expected_first_passage_cost(chain, vi.probs);
    CHECK((vi.values - fp).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a zero-cost MDP has an identically zero value function") {
    MdpSpec mdp = fixtures::random_mdp(3333);
    for (auto& acts : mdp.actions)
        for (auto& a : acts) a.cost = 0.0;
    MdpPolicy vi = standard_value_iteration(mdp, RspParams::fixedpoint(1.0));
    CHECK(vi.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first-passage cost of the optimal policy equals its value function") {
    MdpSpec maze = build_maze();
    MdpPolicy vi = standard_value_iteration(maze, RspParams::fixedpoint(1.0));
    Vector fp = expected_first_passage_cost(maze, vi.probs);
    CHECK((fp - vi.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("first-passage under the uniform policy is the soft-VI limit") {
    MdpSpec maze = build_maze();
    std::vector<std::vector<Real>> uniform(11);
    for (Index k = 0; k < 10; ++k) uniform[static_cast<size_t>(k)].assign(4, 0.25);
    Vector fp = expected_first_passage_cost(maze, uniform);
    CHECK(fp[0] == doctest::Approx(297.3948710444489).epsilon(1e-9));

    // the +100 square-7 spikes make the softmin curvature visible at 1e-6;
    // the gap vanishes linearly in theta
    MdpPolicy cold = soft_value_iteration(maze, RspParams::fixedpoint(1e-6));
    CHECK((cold.values - fp).cwiseAbs().maxCoeff() < 0.05);
    MdpPolicy colder = soft_value_iteration(maze, RspParams::fixedpoint(1e-8));
    CHECK((colder.values - fp).cwiseAbs().maxCoeff() < 1e-3);

    // on small-cost MDPs the 1e-3 agreement holds at theta = 1e-6 directly
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 4; ++trial) {
        MdpSpec mdp = fixtures::random_mdp(rng());
        std::vector<std::vector<Real>> prior(static_cast<size_t>(mdp.n_states));
        for (Index k = 0; k < mdp.n_states; ++k)
            for (const auto& a : mdp.actions[static_cast<size_t>(k)])
                prior[static_cast<size_t>(k)].push_back(a.prior);
        MdpPolicy soft = soft_value_iteration(mdp, RspParams::fixedpoint(1e-6));
        Vector fpr = expected_first_passage_cost(mdp, prior);
        CHECK((soft.values - fpr).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("standard values lower-bound the soft free energies") {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 5; ++trial) {
        MdpSpec mdp = fixtures::random_mdp(rng());
        MdpPolicy vi = standard_value_iteration(mdp, RspParams::fixedpoint(1.0));
        Vector previous = Vector::Constant(mdp.n_states, std::numeric_limits<Real>::infinity());
        for (Real theta : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            MdpPolicy soft = soft_value_iteration(mdp, RspParams::fixedpoint(theta));
            for (Index k = 0; k < mdp.n_states; ++k) {
                CHECK(vi.values[k] <= soft.values[k] + 1e-9);
                CHECK(soft.values[k] <= previous[k] + 1e-9); // non-increasing in theta
            }
            previous = soft.values;
        }
    }
}

TEST_CASE("mdp json round-trips and rejects the reserved next_cost field") {
    MdpSpec maze = build_maze();
    std::ostringstream buffer;
    save_mdp(buffer, maze);
    std::istringstream again(buffer.str());
    MdpSpec loaded = load_mdp(again);
    CHECK(loaded.n_states == maze.n_states);
    REQUIRE(loaded.actions.size() == maze.actions.size());
    for (Index k = 0; k < maze.n_states; ++k) {
        const auto& a = maze.actions[static_cast<size_t>(k)];
        const auto& b = loaded.actions[static_cast<size_t>(k)];
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].cost == b[i].cost);
            CHECK(a[i].prior == b[i].prior);
            REQUIRE(a[i].next.size() == b[i].next.size());
            for (size_t o = 0; o < a[i].next.size(); ++o) {
                CHECK(a[i].next[o].first == b[i].next[o].first);
                CHECK(a[i].next[o].second == b[i].next[o].second);
            }
        }
    }

    std::istringstream bad(R"({"n_states": 2, "goal": 2, "states": [
        {"id": 1, "actions": [{"id": 0, "cost": 1.0, "next": {"2": 1.0},
                               "next_cost": {"2": 5.0}}]}]})");
    CHECK_THROWS_WITH_AS(load_mdp(bad), doctest::Contains("next_cost"), ParseError);
}

TEST_CASE("mdp validation catches broken environments") {
    std::istringstream bad_env(R"({"n_states": 2, "goal": 2, "states": [
        {"id": 1, "actions": [{"id": 0, "cost": 1.0, "next": {"2": 0.7}}]}]})");
    CHECK_THROWS_AS(load_mdp(bad_env), GraphValidationError);

    std::istringstream unreachable(R"({"n_states": 3, "goal": 3, "states": [
        {"id": 1, "actions": [{"id": 0, "cost": 1.0, "next": {"2": 1.0}}]},
        {"id": 2, "actions": [{"id": 0, "cost": 1.0, "next": {"1": 1.0}}]},
        {"id": 3, "actions": []}]})");
    CHECK_THROWS_AS(load_mdp(unreachable), GraphValidationError);
}
