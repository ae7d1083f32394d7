#pragma once

#include <nlohmann/json.hpp>

#include "rsp/constrained.hpp"
#include "rsp/engine.hpp"
#include "rsp/graph.hpp"
#include "rsp/mdp.hpp"
#include "rsp/sim.hpp"

namespace rsp {

/// JSON views of the result types, shared by the CLI and the golden tests.
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const Graph& g, const RspSolution& sol);
nlohmann::json to_json(const Graph& g, const DualSolveResult& result);
nlohmann::json to_json(const MdpSpec& mdp, const MdpPolicy& policy);
nlohmann::json to_json(const SimResult& result);

} // namespace rsp
