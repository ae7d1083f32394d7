#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rsp/constrained.hpp"
#include "rsp/fixedpoint.hpp"
#include "rsp/graph_io.hpp"
#include "rsp/log.hpp"
#include "rsp/mdp_io.hpp"
#include "rsp/output.hpp"
#include "rsp/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitIo = 3;

void write_output(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw rsp::Error("cannot open " + out_path + " for writing");
    out << payload << "\n";
}

rsp::MdpSpec load_mdp_source(const std::string& spec) {
    if (spec == "maze") return rsp::build_maze();
    return rsp::load_mdp_file(spec);
}

std::vector<rsp::Real> parse_grid(const std::string& text) {
    // lo:hi:count, log-spaced
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw rsp::Error("grid must be lo:hi:count, e.g. 1e-3:1e2:41");
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const int count = std::stoi(text.substr(c2 + 1));
    if (!(lo > 0) || !(hi > lo) || count < 2) throw rsp::Error("bad grid bounds");
    std::vector<rsp::Real> grid(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<size_t>(i)] =
            std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i / (count - 1));
    return grid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained randomized shortest paths toolkit"};
    app.require_subcommand(1);

    std::string input;
    std::string out_path;
    std::string solver = "dual";
    std::string mdp_spec;
    std::string grid_spec = "1e-3:1e2:41";
    double theta = 1.0;
    double tol = -1; // default chosen per solver
    long long max_iter = -1;
    long long runs = 1000000;
    long long max_steps = 1000000;
    std::uint64_t seed = 0;
    bool standard_vi = false;
    bool show_report = false;
    bool outcome_costs = false;

    auto* validate_cmd = app.add_subcommand("validate", "validate a graph file");
    validate_cmd->add_option("file", input, "graph JSON file")->required();

    auto* solve_cmd = app.add_subcommand("solve", "solve a constrained RSP problem");
    solve_cmd->add_option("file", input, "graph JSON file")->required();
    solve_cmd->add_option("--solver", solver, "dual | fixedpoint")
        ->check(CLI::IsMember({"dual", "fixedpoint"}));
    solve_cmd->add_option("--theta", theta, "inverse temperature (> 0)");
    solve_cmd->add_option("--tol", tol, "convergence tolerance");
    solve_cmd->add_option("--max-iter", max_iter, "iteration / sweep cap");
    solve_cmd->add_option("--out", out_path, "write JSON here instead of stdout");

    auto* mdp_cmd = app.add_subcommand("mdp", "soft / standard value iteration on an MDP");
    mdp_cmd->add_option("file", input, "MDP JSON file");
    mdp_cmd->add_option("--mdp", mdp_spec, "'maze' or an MDP JSON file");
    mdp_cmd->add_option("--theta", theta, "inverse temperature (> 0)");
    mdp_cmd->add_option("--tol", tol, "convergence tolerance");
    mdp_cmd->add_option("--max-iter", max_iter, "iteration cap");
    mdp_cmd->add_flag("--standard", standard_vi, "run standard value iteration instead");
    mdp_cmd->add_flag("--report", show_report, "print the policy table to stderr");
    mdp_cmd->add_option("--out", out_path, "write JSON here instead of stdout");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo rollout of a soft-VI policy");
    sim_cmd->add_option("--mdp", mdp_spec, "'maze' or an MDP JSON file")->required();
    sim_cmd->add_option("--theta", theta, "inverse temperature (> 0)");
    sim_cmd->add_option("--runs", runs, "number of runs");
    sim_cmd->add_option("--seed", seed, "RNG seed");
    sim_cmd->add_option("--max-steps", max_steps, "per-run step cap");
    sim_cmd->add_flag("--outcome-costs", outcome_costs,
                      "charge exact outcome-dependent costs (maze only)");
    sim_cmd->add_option("--out", out_path, "write JSON here instead of stdout");

    auto* sweep_cmd = app.add_subcommand("sweep", "theta sweep: solve, simulate, write CSV");
    sweep_cmd->add_option("--mdp", mdp_spec, "'maze' or an MDP JSON file")->required();
    sweep_cmd->add_option("--grid", grid_spec, "log grid lo:hi:count");
    sweep_cmd->add_option("--runs", runs, "runs per point");
    sweep_cmd->add_option("--seed", seed, "RNG seed");
    sweep_cmd->add_option("--max-steps", max_steps, "per-run step cap");
    sweep_cmd->add_option("--out", out_path, "write the CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            try {
                rsp::GraphBundle bundle = rsp::load_graph_file(input);
                rsp::ValidationReport report =
                    rsp::validate(bundle.graph, bundle.chain, bundle.constraints);
                write_output(out_path, rsp::to_json(report).dump(2));
                std::cerr << "valid: " << bundle.graph.size() << " nodes, "
                          << bundle.graph.edge_count() << " edges\n";
                return kExitOk;
            } catch (const rsp::GraphValidationError& e) {
                write_output(out_path, rsp::to_json(e.report).dump(2));
                std::cerr << e.what() << "\n";
                return kExitValidation;
            }
        }

        if (solve_cmd->parsed()) {
            rsp::GraphBundle bundle = rsp::load_graph_file(input);
            rsp::RspParams params = solver == "dual" ? rsp::RspParams::dual(theta)
                                                     : rsp::RspParams::fixedpoint(theta);
            if (tol > 0) params.tol = tol;
            if (max_iter > 0) params.max_iter = max_iter;
            nlohmann::json out;
            if (solver == "dual") {
                rsp::DualSolveResult result = rsp::solve_constrained_dual(
                    bundle.graph, bundle.chain, bundle.constraints, params);
                out = rsp::to_json(bundle.graph, result);
            } else {
                rsp::RspSolution sol = rsp::solve_constrained_fixedpoint(
                    bundle.graph, bundle.chain, bundle.constraints, params);
                out = rsp::to_json(bundle.graph, sol);
            }
            out["solver"] = solver;
            out["theta"] = theta;
            write_output(out_path, out.dump(2));
            std::cerr << "solved " << input << " at theta=" << theta << " ("
                      << out["iterations"].get<long long>() << " iterations)\n";
            return kExitOk;
        }

        if (mdp_cmd->parsed()) {
            if (mdp_spec.empty() && input.empty())
                throw rsp::Error("give an MDP file or --mdp maze");
            rsp::MdpSpec mdp = load_mdp_source(mdp_spec.empty() ? input : mdp_spec);
            rsp::RspParams params = rsp::RspParams::fixedpoint(theta);
            if (tol > 0) params.tol = tol;
            if (max_iter > 0) params.max_iter = max_iter;
            rsp::MdpPolicy policy = standard_vi ? rsp::standard_value_iteration(mdp, params)
                                                : rsp::soft_value_iteration(mdp, params);
            nlohmann::json out = rsp::to_json(mdp, policy);
            out["mode"] = standard_vi ? "standard" : "soft";
            out["theta"] = theta;
            write_output(out_path, out.dump(2));
            if (show_report) std::cerr << rsp::policy_report(mdp, policy);
            std::cerr << (standard_vi ? "standard" : "soft") << " value iteration converged in "
                      << policy.iterations << " iterations\n";
            return kExitOk;
        }

        if (sim_cmd->parsed()) {
            rsp::MdpSpec mdp = load_mdp_source(mdp_spec);
            rsp::MdpPolicy policy = rsp::soft_value_iteration(mdp, rsp::RspParams::fixedpoint(theta));
            rsp::SimConfig cfg;
            cfg.runs = runs;
            cfg.seed = seed;
            cfg.max_steps = max_steps;
            if (outcome_costs) {
                if (mdp_spec != "maze")
                    throw rsp::ParseError("--outcome-costs is only defined for the maze");
                cfg.step_cost = rsp::maze_outcome_cost();
            }
            rsp::SimResult result = rsp::simulate_policy(mdp, policy.probs, cfg);
            nlohmann::json out = rsp::to_json(result);
            out["theta"] = theta;
            out["seed"] = seed;
            write_output(out_path, out.dump(2));
            std::cerr << "mean cost " << result.mean_cost << " +- " << result.std_error << " over "
                      << runs << " runs\n";
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            rsp::MdpSpec mdp = load_mdp_source(mdp_spec);
            rsp::SimConfig cfg;
            cfg.runs = runs;
            cfg.seed = seed;
            cfg.max_steps = max_steps;
            std::vector<rsp::SweepRecord> records =
                rsp::theta_sweep(mdp, parse_grid(grid_spec), cfg);
            std::ostringstream csv;
            rsp::write_sweep_csv(csv, records);
            if (out_path.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(out_path);
                if (!out) throw rsp::Error("cannot open " + out_path + " for writing");
                out << csv.str();
            }
            int failed = 0;
            for (const auto& r : records) failed += r.solved ? 0 : 1;
            std::cerr << "sweep finished: " << records.size() - failed << "/" << records.size()
                      << " points solved\n";
            return failed == 0 ? kExitOk : kExitNoConvergence;
        }
    } catch (const rsp::GraphValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const rsp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const rsp::MaxIterExceededError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
        return kExitNoConvergence;
    } catch (const rsp::UnderflowAtThetaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
