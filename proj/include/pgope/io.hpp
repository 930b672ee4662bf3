#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pgope/mdp.hpp"

namespace pgope {

using json = nlohmann::json;

inline json mdp_to_json(const TabularMdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["horizon"] = mdp.horizon;
    j["gamma"] = mdp.gamma;
    j["start_state"] = mdp.start_state;
    j["layer_of"] = mdp.layer_of;
    json trans = json::array();
    json rew = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (!mdp.transitions[s][a].empty()) {
                json next = json::array();
                for (const auto& out : mdp.transitions[s][a]) next.push_back({{"state", out.state}, {"p", out.p}});
                trans.push_back({{"s", s}, {"a", a}, {"next", next}});
            }
            json support = json::array();
            for (const auto& atom : mdp.rewards[s][a]) support.push_back({{"value", atom.value}, {"p", atom.p}});
            rew.push_back({{"s", s}, {"a", a}, {"support", support}});
        }
    }
    j["transitions"] = trans;
    j["rewards"] = rew;
    return j;
}

inline TabularMdp mdp_from_json(const json& j) {
    TabularMdp mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.horizon = j.at("horizon").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    mdp.start_state = j.at("start_state").get<int>();
    mdp.layer_of = j.at("layer_of").get<std::vector<int>>();
    if (mdp.num_states <= 0 || mdp.num_actions <= 0) throw std::invalid_argument("mdp config: bad dimensions");
    mdp.transitions.assign(mdp.num_states, std::vector<std::vector<Outcome>>(mdp.num_actions));
    mdp.rewards.assign(mdp.num_states, std::vector<std::vector<RewardAtom>>(mdp.num_actions));
    for (const auto& entry : j.at("transitions")) {
        const int s = entry.at("s").get<int>();
        const int a = entry.at("a").get<int>();
        if (s < 0 || s >= mdp.num_states || a < 0 || a >= mdp.num_actions)
            throw std::invalid_argument("mdp config: transition entry out of range at (s=" + std::to_string(s) +
                                        ", a=" + std::to_string(a) + ")");
        for (const auto& out : entry.at("next"))
            mdp.transitions[s][a].push_back({out.at("state").get<int>(), out.at("p").get<double>()});
    }
    for (const auto& entry : j.at("rewards")) {
        const int s = entry.at("s").get<int>();
        const int a = entry.at("a").get<int>();
        if (s < 0 || s >= mdp.num_states || a < 0 || a >= mdp.num_actions)
            throw std::invalid_argument("mdp config: reward entry out of range at (s=" + std::to_string(s) +
                                        ", a=" + std::to_string(a) + ")");
        for (const auto& atom : entry.at("support"))
            mdp.rewards[s][a].push_back({atom.at("value").get<double>(), atom.at("p").get<double>()});
    }
    mdp.validate();
    return mdp;
}

inline TabularMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mdp file: " + path);
    json j;
    in >> j;
    return mdp_from_json(j);
}

inline void save_mdp(const TabularMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mdp file: " + path);
    out << mdp_to_json(mdp).dump(2) << "\n";
}

/// Fixed-format double rendering so repeated runs produce byte-identical CSVs.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace pgope
