#include "rsp/graph_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

namespace rsp {

using nlohmann::json;

namespace {

Index to_internal(const json& j, const char* field, Index n, const std::string& origin) {
    if (!j.is_number_integer())
        throw ParseError(origin + ": field '" + field + "' must be an integer");
    const auto v = j.get<long long>();
    if (v < 1 || v > n)
        throw ParseError(origin + ": field '" + field + "' = " + std::to_string(v) +
                         " out of range 1.." + std::to_string(n));
    return static_cast<Index>(v - 1);
}

Real number(const json& j, const char* field, const std::string& origin) {
    if (!j.is_number()) throw ParseError(origin + ": field '" + field + "' must be a number");
    return j.get<Real>();
}

} // namespace

GraphBundle load_graph(std::istream& in, const std::string& origin) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ParseError(origin + ": top level must be an object");
    if (!root.contains("n") || !root.contains("goal") || !root.contains("edges"))
        throw ParseError(origin + ": required fields are n, goal, edges");

    if (!root["n"].is_number_integer()) throw ParseError(origin + ": n must be an integer");
    const auto n = root["n"].get<Index>();
    if (n < 1) throw ParseError(origin + ": n must be >= 1");
    const Index goal = to_internal(root["goal"], "goal", n, origin);
    Index source = 0;
    if (root.contains("source")) source = to_internal(root["source"], "source", n, origin);

    std::vector<Edge> edges;
    // explicit p_ref per edge position, NaN = defaulted
    std::vector<Real> pref_explicit;
    for (const auto& je : root["edges"]) {
        Edge e;
        e.from = to_internal(je.at("from"), "from", n, origin);
        e.to = to_internal(je.at("to"), "to", n, origin);
        e.cost = number(je.at("cost"), "cost", origin);
        e.affinity = 1.0;
        edges.push_back(e);
        pref_explicit.push_back(je.contains("p_ref") ? number(je["p_ref"], "p_ref", origin)
                                                     : std::numeric_limits<Real>::quiet_NaN());
    }

    // keep the explicit p_ref values attached through the CSR sort
    std::vector<size_t> order(edges.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return edges[a].from != edges[b].from ? edges[a].from < edges[b].from
                                              : edges[a].to < edges[b].to;
    });
    std::vector<Edge> sorted;
    std::vector<Real> pref_sorted;
    sorted.reserve(edges.size());
    for (size_t k : order) {
        sorted.push_back(edges[k]);
        pref_sorted.push_back(pref_explicit[k]);
    }

    Graph g(n, goal, sorted, source); // throws on duplicates/self-loops/bad costs
    ReferenceChain defaults = build_reference_chain(g);

    std::vector<Real> p(defaults.values().begin(), defaults.values().end());
    for (size_t k = 0; k < sorted.size(); ++k) {
        if (std::isnan(pref_sorted[k])) continue;
        const Index idx = g.edge_index(sorted[k].from, sorted[k].to);
        p[static_cast<size_t>(idx)] = pref_sorted[k];
    }
    ReferenceChain rc(g, std::move(p));

    std::vector<Index> cnodes;
    std::vector<Real> q(static_cast<size_t>(g.edge_count()), 0.0);
    if (root.contains("constrained")) {
        for (const auto& jc : root["constrained"]) {
            const Index node = to_internal(jc.at("node"), "node", n, origin);
            cnodes.push_back(node);
            if (!jc.contains("q") || !jc["q"].is_object())
                throw ParseError(origin + ": constrained entry needs a 'q' object");
            for (const auto& [key, val] : jc["q"].items()) {
                Index j;
                try {
                    j = static_cast<Index>(std::stoll(key)) - 1;
                } catch (const std::exception&) {
                    throw ParseError(origin + ": q key '" + key + "' is not a node id");
                }
                if (j < 0 || j >= n)
                    throw ParseError(origin + ": q key '" + key + "' out of range");
                const Index idx = g.edge_index(node, j);
                if (idx < 0)
                    throw ParseError(origin + ": q[" + std::to_string(node + 1) + "][" + key +
                                     "] refers to a non-existing edge");
                q[static_cast<size_t>(idx)] = number(val, "q", origin);
            }
        }
    }
    ConstraintSpec cs(g, std::move(cnodes), std::move(q));

    ValidationReport report = validate(g, rc, cs);
    if (!report.ok()) throw GraphValidationError(std::move(report));
    return GraphBundle{std::move(g), std::move(rc), std::move(cs)};
}

GraphBundle load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return load_graph(in, path);
}

void save_graph(std::ostream& out, const GraphBundle& bundle) {
    const Graph& g = bundle.graph;
    json root;
    root["n"] = g.size();
    root["goal"] = g.goal() + 1;
    if (g.source() != 0) root["source"] = g.source() + 1;
    json edges = json::array();
    for (Index i = 0; i < g.size(); ++i) {
        auto succ = g.successors(i);
        auto cost = g.edge_costs(i);
        auto pref = bundle.chain.row(g, i);
        for (Index k = 0; k < g.out_degree(i); ++k) {
            json e;
            e["from"] = i + 1;
            e["to"] = succ[k] + 1;
            e["cost"] = cost[k];
            e["p_ref"] = pref[k];
            edges.push_back(std::move(e));
        }
    }
    root["edges"] = std::move(edges);
    json constrained = json::array();
    for (Index i : bundle.constraints.nodes()) {
        json jc;
        jc["node"] = i + 1;
        json q = json::object();
        auto succ = g.successors(i);
        auto qrow = bundle.constraints.q_row(g, i);
        for (Index k = 0; k < g.out_degree(i); ++k)
            q[std::to_string(succ[k] + 1)] = qrow[k];
        jc["q"] = std::move(q);
        constrained.push_back(std::move(jc));
    }
    root["constrained"] = std::move(constrained);
    out << root.dump(2) << "\n";
}

void save_graph_file(const std::string& path, const GraphBundle& bundle) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    save_graph(out, bundle);
}

} // namespace rsp
