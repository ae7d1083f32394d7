#include "rsp/mdp_io.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

namespace rsp {

using nlohmann::json;

MdpSpec load_mdp(std::istream& in, const std::string& origin) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!root.is_object() || !root.contains("n_states") || !root.contains("goal") ||
        !root.contains("states"))
        throw ParseError(origin + ": required fields are n_states, goal, states");

    MdpSpec mdp;
    mdp.n_states = root["n_states"].get<Index>();
    if (mdp.n_states < 1) throw ParseError(origin + ": n_states must be >= 1");
    const auto goal_1 = root["goal"].get<long long>();
    if (goal_1 != mdp.n_states)
        throw ParseError(origin + ": the goal must be the last state (goal == n_states)");
    mdp.goal = mdp.n_states - 1;
    mdp.actions.resize(static_cast<size_t>(mdp.n_states));

    std::vector<char> seen(static_cast<size_t>(mdp.n_states), 0);
    for (const auto& js : root["states"]) {
        const auto id = js.at("id").get<long long>();
        if (id < 1 || id > mdp.n_states) throw ParseError(origin + ": state id out of range");
        const Index k = static_cast<Index>(id - 1);
        if (seen[static_cast<size_t>(k)])
            throw ParseError(origin + ": duplicate state " + std::to_string(id));
        seen[static_cast<size_t>(k)] = 1;
        if (!js.contains("actions")) continue;
        for (const auto& ja : js["actions"]) {
            if (ja.contains("next_cost"))
                throw ParseError(origin + ": action-to-state costs ('next_cost') are reserved "
                                          "but not supported; only state-to-action costs exist");
            MdpAction act;
            act.id = ja.at("id").get<int>();
            act.cost = ja.at("cost").get<Real>();
            if (ja.contains("prior")) act.prior = ja["prior"].get<Real>();
            if (!ja.contains("next") || !ja["next"].is_object())
                throw ParseError(origin + ": action needs a 'next' object");
            for (const auto& [key, val] : ja["next"].items()) {
                long long l;
                try {
                    l = std::stoll(key);
                } catch (const std::exception&) {
                    throw ParseError(origin + ": next key '" + key + "' is not a state id");
                }
                if (l < 1 || l > mdp.n_states)
                    throw ParseError(origin + ": next key '" + key + "' out of range");
                act.next.emplace_back(static_cast<Index>(l - 1), val.get<Real>());
            }
            std::sort(act.next.begin(), act.next.end());
            mdp.actions[static_cast<size_t>(k)].push_back(std::move(act));
        }
    }

    mdp.resolve_priors();
    ValidationReport report = mdp.validate();
    if (!report.ok()) throw GraphValidationError(std::move(report));
    return mdp;
}

MdpSpec load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return load_mdp(in, path);
}

void save_mdp(std::ostream& out, const MdpSpec& mdp) {
    json root;
    root["n_states"] = mdp.n_states;
    root["goal"] = mdp.goal + 1;
    json states = json::array();
    for (Index k = 0; k < mdp.n_states; ++k) {
        json js;
        js["id"] = k + 1;
        json actions = json::array();
        for (const auto& a : mdp.actions[static_cast<size_t>(k)]) {
            json ja;
            ja["id"] = a.id;
            ja["cost"] = a.cost;
            if (a.prior >= 0) ja["prior"] = a.prior;
            json next = json::object();
            for (auto [l, p] : a.next) next[std::to_string(l + 1)] = p;
            ja["next"] = std::move(next);
            actions.push_back(std::move(ja));
        }
        js["actions"] = std::move(actions);
        states.push_back(std::move(js));
    }
    root["states"] = std::move(states);
    out << root.dump(2) << "\n";
}

void save_mdp_file(const std::string& path, const MdpSpec& mdp) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    save_mdp(out, mdp);
}

} // namespace rsp
