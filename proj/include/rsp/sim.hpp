#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsp/mdp.hpp"

namespace rsp {

/// Per-step cost override for simulation: (state, action position, outcome
/// state) -> cost. Used for outcome-dependent costs that the MdpSpec encodes
/// only in expectation.
using StepCostFn = std::function<Real(Index, Index, Index)>;

struct SimConfig {
    long long runs = 1000000;
    std::uint64_t seed = 0;
    long long max_steps = 1000000;
    StepCostFn step_cost; // empty = charge the action cost c_ka
};

struct SimResult {
    Real mean_cost = 0;
    Real std_error = 0;
    long long runs = 0;
    long long truncated = 0; // runs stopped by max_steps, reported not hidden
    /// per-run total costs bucketed to the nearest integer, sorted by bucket
    std::vector<std::pair<long long, long long>> histogram;
};

struct SweepRecord {
    Real theta = 0;
    Real analytic_cost = 0;
    Real sim_mean = 0;
    Real sim_stderr = 0;
    Real entropy = 0;
    Index iterations = 0;
    bool solved = false;
    std::string error;
};

/**
 * The probabilistic maze: 11 squares on a 4x3 grid with one wall, start in
 * square 1, goal square 11. Four actions (N, E, S, W) per square; north slips
 * east or west with probability 0.1 each, the other moves are deterministic,
 * and a move into a wall or off the grid stays put. Every step costs 1 and
 * entering square 7 costs 100 more; action costs carry that penalty in
 * expectation (c_ka = 1 + 100 P(outcome = 7)).
 */
MdpSpec build_maze();

/// Exact outcome-dependent maze step costs (1 + 100 when the outcome is
/// square 7); agrees with the MdpSpec action costs in expectation.
StepCostFn maze_outcome_cost();

/**
 * Monte-Carlo rollouts of a stochastic policy from the start state to the
 * goal. Every run r draws from its own counter-based stream seeded by
 * (seed, r), and per-run costs are pairwise-summed in run order, so the result
 * is bit-identical for a given config regardless of scheduling.
 */
SimResult simulate_policy(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          const SimConfig& cfg);

/**
 * For each theta: soft value iteration, analytic expected cost of the
 * resulting policy, visit-weighted state entropy, and a simulation. Points are
 * solved by a small worker pool; records come back sorted by theta. Per-point
 * solver failures are recorded in the record and the sweep continues.
 */
std::vector<SweepRecord> theta_sweep(const MdpSpec& mdp, std::vector<Real> theta_grid,
                                     const SimConfig& cfg);

/// Default sweep grid: 41 log-spaced thetas in [1e-3, 1e2].
std::vector<Real> default_theta_grid();

/// Text table of per-state action probabilities with the argmax flagged.
std::string policy_report(const MdpSpec& mdp, const MdpPolicy& policy);

/// CSV with columns theta,analytic_cost,sim_mean,sim_stderr,entropy,iterations
/// (17 significant digits).
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

} // namespace rsp
