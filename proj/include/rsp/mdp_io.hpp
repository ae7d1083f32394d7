#pragma once

#include <iosfwd>
#include <string>

#include "rsp/mdp.hpp"

namespace rsp {

/**
 * Loads an MDP from the JSON format
 *
 *   {"n_states": int, "goal": int, "states": [{"id": k, "actions":
 *    [{"id": a, "cost": c, "next": {"l": p, ...}, "prior": p?}]}]}
 *
 * State ids are 1-based in the file and the goal must be the last state.
 * A reserved "next_cost" field (costs on action-to-state transitions) is
 * recognized but rejected: only state-to-action costs are supported.
 */
MdpSpec load_mdp(std::istream& in, const std::string& origin = "<stream>");
MdpSpec load_mdp_file(const std::string& path);

void save_mdp(std::ostream& out, const MdpSpec& mdp);
void save_mdp_file(const std::string& path, const MdpSpec& mdp);

} // namespace rsp
