#pragma once

#include <span>
#include <string>
#include <vector>

#include "rsp/errors.hpp"
#include "rsp/types.hpp"

namespace rsp {

struct Edge {
    Index from = 0;
    Index to = 0;
    Real cost = 0;
    Real affinity = 1;
};

/**
 * Directed weighted graph with non-negative edge costs and a distinguished
 * absorbing goal node. Edges are kept in CSR order (sorted by source, then
 * target); an absent edge has implicit cost +inf and is simply not stored, so
 * no arithmetic ever touches an infinity. Immutable after construction.
 *
 * Nodes are 0-based here; the JSON format is 1-based and converted at the I/O
 * boundary.
 */
class Graph {
public:
    Graph(Index n, Index goal, std::vector<Edge> edges, Index source = 0);

    Index size() const { return n_; }
    Index goal() const { return goal_; }
    Index source() const { return source_; }
    Index edge_count() const { return static_cast<Index>(to_.size()); }

    Index out_degree(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
    Index row_begin(Index i) const { return row_ptr_[i]; }
    Index row_end(Index i) const { return row_ptr_[i + 1]; }

    /// Successor node ids of i, aligned with edge_costs(i)/affinities(i).
    std::span<const Index> successors(Index i) const {
        return {to_.data() + row_ptr_[i], static_cast<size_t>(out_degree(i))};
    }
    std::span<const Real> edge_costs(Index i) const {
        return {cost_.data() + row_ptr_[i], static_cast<size_t>(out_degree(i))};
    }
    std::span<const Real> affinities(Index i) const {
        return {affinity_.data() + row_ptr_[i], static_cast<size_t>(out_degree(i))};
    }

    /// Flat per-edge arrays in CSR order; solver-side cost vectors (e.g.
    /// augmented costs) are aligned with these.
    std::span<const Index> edge_targets() const { return to_; }
    std::span<const Real> costs() const { return cost_; }

    /// Edge index of (i, j), or -1 when absent.
    Index edge_index(Index i, Index j) const;
    bool has_edge(Index i, Index j) const { return edge_index(i, j) >= 0; }

private:
    Index n_;
    Index goal_;
    Index source_;
    std::vector<Index> row_ptr_;
    std::vector<Index> to_;
    std::vector<Real> cost_;
    std::vector<Real> affinity_;
};

/**
 * Row-stochastic reference transition probabilities, stored per edge in the
 * owning graph's CSR order. Rows of non-goal nodes sum to one; the goal row is
 * all zero (the walk is killed there).
 */
class ReferenceChain {
public:
    ReferenceChain(const Graph& g, std::vector<Real> probs);

    std::span<const Real> row(const Graph& g, Index i) const {
        return {p_.data() + g.row_begin(i), static_cast<size_t>(g.out_degree(i))};
    }
    std::span<const Real> values() const { return p_; }
    Real operator[](Index edge) const { return p_[edge]; }

private:
    std::vector<Real> p_;
};

/**
 * The set of constrained nodes together with their fixed outgoing
 * distributions q, aligned per edge with the graph storage. q rows must match
 * the reference chain on constrained nodes (checked by validate()).
 */
class ConstraintSpec {
public:
    ConstraintSpec() = default;
    ConstraintSpec(const Graph& g, std::vector<Index> constrained_nodes,
                   std::vector<Real> q_per_edge);

    /// Constrained nodes, ascending.
    std::span<const Index> nodes() const { return nodes_; }
    bool is_constrained(Index i) const {
        return i < static_cast<Index>(mask_.size()) && mask_[i] != 0;
    }
    bool empty() const { return nodes_.empty(); }

    std::span<const Real> q_row(const Graph& g, Index i) const {
        return {q_.data() + g.row_begin(i), static_cast<size_t>(g.out_degree(i))};
    }
    std::span<const Real> q_values() const { return q_; }

private:
    std::vector<Index> nodes_;
    std::vector<char> mask_;
    std::vector<Real> q_; // zero outside constrained rows
};

struct ValidationIssue {
    enum class Code {
        Unreachable,
        RowSumNotOne,
        ConstraintMismatch,
        ConstraintOffEdge,
    };
    Code code;
    Index node = -1;   // 0-based
    Index target = -1; // 0-based, -1 when not edge-specific
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::vector<std::string> warnings;

    bool ok() const { return issues.empty(); }
    bool has(ValidationIssue::Code code, Index node = -1) const;
    std::string to_string() const;
};

/// Thrown by load paths when validation fails; the report lists every issue.
struct GraphValidationError : Error {
    explicit GraphValidationError(ValidationReport r)
        : Error("graph validation failed:\n" + r.to_string()), report(std::move(r)) {}
    ValidationReport report;
};

/**
 * Reference random walk from edge affinities: p_ij = a_ij / sum_k a_ik on
 * non-goal rows, zero on the goal row. Throws DanglingNodeError when a
 * non-goal node has no outgoing edge.
 */
ReferenceChain build_reference_chain(const Graph& g);

/**
 * Checks every structural invariant: goal reachability from all nodes,
 * row-stochasticity of the reference chain, and q == p_ref on constrained
 * nodes. An empty report means the triple is valid. Non-strong-connectivity
 * is only a warning.
 */
ValidationReport validate(const Graph& g, const ReferenceChain& rc, const ConstraintSpec& cs);

} // namespace rsp
