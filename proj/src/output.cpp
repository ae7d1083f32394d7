#include "rsp/output.hpp"

namespace rsp {

using nlohmann::json;

namespace {

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_values(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

} // namespace

json to_json(const ValidationReport& report) {
    json out;
    out["valid"] = report.ok();
    json errors = json::array();
    for (const auto& issue : report.issues) {
        json e;
        switch (issue.code) {
        case ValidationIssue::Code::Unreachable: e["code"] = "Unreachable"; break;
        case ValidationIssue::Code::RowSumNotOne: e["code"] = "RowSumNotOne"; break;
        case ValidationIssue::Code::ConstraintMismatch: e["code"] = "ConstraintMismatch"; break;
        case ValidationIssue::Code::ConstraintOffEdge: e["code"] = "ConstraintOffEdge"; break;
        }
        e["node"] = issue.node + 1;
        if (issue.target >= 0) e["target"] = issue.target + 1;
        if (!issue.detail.empty()) e["detail"] = issue.detail;
        errors.push_back(std::move(e));
    }
    out["errors"] = std::move(errors);
    out["warnings"] = report.warnings;
    return out;
}

json to_json(const Graph& g, const RspSolution& sol) {
    json out;
    out["n"] = g.size();
    out["goal"] = g.goal() + 1;
    out["source"] = g.source() + 1;
    out["phi"] = vector_values(sol.phi);
    out["z_backward"] = vector_values(sol.z_b);
    out["policy"] = matrix_rows(sol.policy);
    out["edge_flows"] = matrix_rows(sol.edge_flows);
    out["node_flows"] = vector_values(sol.node_flows);
    out["expected_cost"] = sol.expected_cost;
    out["rel_entropy"] = sol.rel_entropy;
    out["total_entropy"] = sol.total_entropy;
    out["iterations"] = sol.iterations;
    out["residual"] = sol.residual;
    out["converged"] = sol.converged;
    return out;
}

json to_json(const Graph& g, const DualSolveResult& result) {
    json out = to_json(g, result.solution);
    json trace;
    trace["dual_objective"] = result.trace.dual_objective;
    trace["constraint_residual"] = result.trace.constraint_residual;
    out["trace"] = std::move(trace);
    out["augmented_costs"] = result.costs.c_prime;
    out["extra_costs"] = result.costs.delta;
    return out;
}

json to_json(const MdpSpec& mdp, const MdpPolicy& policy) {
    json out;
    out["n_states"] = mdp.n_states;
    out["goal"] = mdp.goal + 1;
    out["values"] = vector_values(policy.values);
    json probs = json::array();
    json action_ids = json::array();
    for (Index k = 0; k < mdp.n_states; ++k) {
        probs.push_back(policy.probs[static_cast<size_t>(k)]);
        json ids = json::array();
        for (const auto& a : mdp.actions[static_cast<size_t>(k)]) ids.push_back(a.id);
        action_ids.push_back(std::move(ids));
    }
    out["policy"] = std::move(probs);
    out["action_ids"] = std::move(action_ids);
    out["iterations"] = policy.iterations;
    out["residual"] = policy.residual;
    return out;
}

json to_json(const SimResult& result) {
    json out;
    out["mean_cost"] = result.mean_cost;
    out["std_error"] = result.std_error;
    out["runs"] = result.runs;
    out["truncated"] = result.truncated;
    json hist = json::array();
    for (auto [bucket, count] : result.histogram) hist.push_back(json::array({bucket, count}));
    out["histogram"] = std::move(hist);
    return out;
}

} // namespace rsp
