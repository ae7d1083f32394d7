#pragma once

#include <iosfwd>
#include <string>
#include <tuple>

#include "rsp/graph.hpp"

namespace rsp {

struct GraphBundle {
    Graph graph;
    ReferenceChain chain;
    ConstraintSpec constraints;
};

/**
 * Loads and validates a graph triple from the JSON format
 *
 *   {"n": int, "goal": int, "edges": [{"from": i, "to": j, "cost": c,
 *    "p_ref": p?}], "constrained": [{"node": i, "q": {"j": p, ...}}]}
 *
 * Node ids are 1-based in the file. Edges without an explicit "p_ref" default
 * to the affinity-normalized reference walk. Throws ParseError on malformed
 * input and GraphValidationError when the parsed triple violates an invariant.
 */
GraphBundle load_graph(std::istream& in, const std::string& origin = "<stream>");
GraphBundle load_graph_file(const std::string& path);

void save_graph(std::ostream& out, const GraphBundle& bundle);
void save_graph_file(const std::string& path, const GraphBundle& bundle);

} // namespace rsp
