#include "rsp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsp/log.hpp"

namespace rsp {

namespace {

constexpr Real kRowSumTol = 1e-12;

std::string issue_text(const ValidationIssue& is) {
    std::ostringstream os;
    switch (is.code) {
    case ValidationIssue::Code::Unreachable:
        os << "Unreachable(" << is.node + 1 << "): goal not reachable from node " << is.node + 1;
        break;
    case ValidationIssue::Code::RowSumNotOne:
        os << "RowSumNotOne(" << is.node + 1 << "): " << is.detail;
        break;
    case ValidationIssue::Code::ConstraintMismatch:
        os << "ConstraintMismatch(" << is.node + 1 << "->" << is.target + 1 << "): " << is.detail;
        break;
    case ValidationIssue::Code::ConstraintOffEdge:
        os << "ConstraintOffEdge(" << is.node + 1 << "->" << is.target + 1
           << "): q assigned to a non-existing edge";
        break;
    }
    return os.str();
}

} // namespace

Graph::Graph(Index n, Index goal, std::vector<Edge> edges, Index source)
    : n_(n), goal_(goal), source_(source) {
    if (n < 1) throw ParseError("graph needs at least one node");
    if (goal < 0 || goal >= n) throw ParseError("goal index out of range");
    if (source < 0 || source >= n) throw ParseError("source index out of range");

    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    for (size_t k = 0; k < edges.size(); ++k) {
        const Edge& e = edges[k];
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
            throw ParseError("edge endpoint out of range: " + std::to_string(e.from + 1) + "->" +
                             std::to_string(e.to + 1));
        if (e.from == e.to)
            throw ParseError("self-loop on node " + std::to_string(e.from + 1) + " is not allowed");
        if (!(e.cost >= 0) || !std::isfinite(e.cost))
            throw ParseError("negative or non-finite cost on edge " + std::to_string(e.from + 1) +
                             "->" + std::to_string(e.to + 1));
        if (!(e.affinity > 0) || !std::isfinite(e.affinity))
            throw ParseError("edge affinity must be positive and finite");
        if (k > 0 && edges[k - 1].from == e.from && edges[k - 1].to == e.to)
            throw ParseError("DuplicateEdge: " + std::to_string(e.from + 1) + "->" +
                             std::to_string(e.to + 1));
    }

    row_ptr_.assign(static_cast<size_t>(n) + 1, 0);
    to_.reserve(edges.size());
    cost_.reserve(edges.size());
    affinity_.reserve(edges.size());
    for (const Edge& e : edges) ++row_ptr_[e.from + 1];
    for (Index i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
    for (const Edge& e : edges) {
        to_.push_back(e.to);
        cost_.push_back(e.cost);
        affinity_.push_back(e.affinity);
    }
}

Index Graph::edge_index(Index i, Index j) const {
    auto succ = successors(i);
    auto it = std::lower_bound(succ.begin(), succ.end(), j);
    if (it == succ.end() || *it != j) return -1;
    return row_ptr_[i] + (it - succ.begin());
}

ReferenceChain::ReferenceChain(const Graph& g, std::vector<Real> probs) : p_(std::move(probs)) {
    if (static_cast<Index>(p_.size()) != g.edge_count())
        throw ParseError("reference chain size does not match edge count");
}

ConstraintSpec::ConstraintSpec(const Graph& g, std::vector<Index> constrained_nodes,
                               std::vector<Real> q_per_edge)
    : nodes_(std::move(constrained_nodes)), q_(std::move(q_per_edge)) {
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    mask_.assign(static_cast<size_t>(g.size()), 0);
    for (Index i : nodes_) {
        if (i < 0 || i >= g.size()) throw ParseError("constrained node index out of range");
        if (i == g.goal()) throw ParseError("the goal node cannot be constrained");
        mask_[static_cast<size_t>(i)] = 1;
    }
    if (q_.empty()) q_.assign(static_cast<size_t>(g.edge_count()), 0.0);
    if (static_cast<Index>(q_.size()) != g.edge_count())
        throw ParseError("constraint q size does not match edge count");
}

ReferenceChain build_reference_chain(const Graph& g) {
    std::vector<Real> p(static_cast<size_t>(g.edge_count()), 0.0);
    for (Index i = 0; i < g.size(); ++i) {
        if (i == g.goal()) continue; // killed at the goal
        if (g.out_degree(i) == 0) throw DanglingNodeError(i + 1);
        Real total = 0;
        for (Real a : g.affinities(i)) total += a;
        const Index b = g.row_begin(i);
        auto aff = g.affinities(i);
        for (Index k = 0; k < g.out_degree(i); ++k) p[b + k] = aff[k] / total;
    }
    return ReferenceChain(g, std::move(p));
}

bool ValidationReport::has(ValidationIssue::Code code, Index node) const {
    for (const auto& is : issues)
        if (is.code == code && (node < 0 || is.node == node)) return true;
    return false;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& is : issues) os << "  error: " << issue_text(is) << "\n";
    for (const auto& w : warnings) os << "  warning: " << w << "\n";
    return os.str();
}

namespace {

// Nodes that can reach `target` following edges forward (BFS on the reverse graph).
std::vector<char> can_reach(const Graph& g, Index target) {
    std::vector<std::vector<Index>> rev(static_cast<size_t>(g.size()));
    for (Index i = 0; i < g.size(); ++i)
        for (Index j : g.successors(i)) rev[static_cast<size_t>(j)].push_back(i);
    std::vector<char> seen(static_cast<size_t>(g.size()), 0);
    std::vector<Index> stack{target};
    seen[static_cast<size_t>(target)] = 1;
    while (!stack.empty()) {
        Index v = stack.back();
        stack.pop_back();
        for (Index u : rev[static_cast<size_t>(v)])
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                stack.push_back(u);
            }
    }
    return seen;
}

bool strongly_connected(const Graph& g) {
    // forward reachability from node 0
    std::vector<char> fwd(static_cast<size_t>(g.size()), 0);
    std::vector<Index> stack{0};
    fwd[0] = 1;
    while (!stack.empty()) {
        Index v = stack.back();
        stack.pop_back();
        for (Index j : g.successors(v))
            if (!fwd[static_cast<size_t>(j)]) {
                fwd[static_cast<size_t>(j)] = 1;
                stack.push_back(j);
            }
    }
    auto bwd = can_reach(g, 0);
    for (Index i = 0; i < g.size(); ++i)
        if (!fwd[static_cast<size_t>(i)] || !bwd[static_cast<size_t>(i)]) return false;
    return true;
}

} // namespace

ValidationReport validate(const Graph& g, const ReferenceChain& rc, const ConstraintSpec& cs) {
    ValidationReport report;

    auto reach = can_reach(g, g.goal());
    for (Index i = 0; i < g.size(); ++i)
        if (!reach[static_cast<size_t>(i)])
            report.issues.push_back({ValidationIssue::Code::Unreachable, i, -1, {}});

    for (Index i = 0; i < g.size(); ++i) {
        auto row = rc.row(g, i);
        Real sum = 0;
        for (Real p : row) sum += p;
        if (i == g.goal()) {
            if (sum != 0)
                report.issues.push_back({ValidationIssue::Code::RowSumNotOne, i, -1,
                                         "goal row of the reference chain must be zero"});
            continue;
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << "reference row sums to " << sum;
            report.issues.push_back({ValidationIssue::Code::RowSumNotOne, i, -1, os.str()});
        }
    }

    for (Index i : cs.nodes()) {
        auto q = cs.q_row(g, i);
        auto p = rc.row(g, i);
        auto succ = g.successors(i);
        Real qsum = 0;
        for (Index k = 0; k < g.out_degree(i); ++k) {
            qsum += q[k];
            if (std::abs(q[k] - p[k]) > kRowSumTol * 100) {
                std::ostringstream os;
                os << "q=" << q[k] << " but p_ref=" << p[k];
                report.issues.push_back(
                    {ValidationIssue::Code::ConstraintMismatch, i, succ[k], os.str()});
            }
        }
        if (std::abs(qsum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << "constraint row sums to " << qsum;
            report.issues.push_back({ValidationIssue::Code::RowSumNotOne, i, -1, os.str()});
        }
    }

    if (!strongly_connected(g)) {
        report.warnings.push_back("graph is not strongly connected (only goal reachability is "
                                  "required by the solvers)");
        log::warn("validate: graph is not strongly connected");
    }
    return report;
}

} // namespace rsp
