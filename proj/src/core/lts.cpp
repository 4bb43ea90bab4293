#include "core/lts.hpp"

#include <map>

#include <json.hpp>

#include "core/errors.hpp"

namespace rmpc {

std::size_t Lts::state_index(const TermPtr& canonical_term) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (equal(states[i], canonical_term)) return i;
    return npos;
}

Lts explore(const TermPtr& start, const BackwardRatePolicy& policy, std::size_t max_states) {
    auto diags = check_well_formed(start);
    if (!diags.empty()) throw IllFormedError("ill-formed start term: " + diags.front().message);
    if (max_states == 0) throw std::invalid_argument("max_states must be positive");

    Lts lts;
    std::map<std::string, std::size_t> index;
    auto intern = [&](const TermPtr& canonical) -> std::size_t {
        std::string text = format_term(canonical);
        auto it = index.find(text);
        if (it != index.end()) return it->second;
        if (lts.states.size() >= max_states) return Lts::npos;
        lts.states.push_back(canonical);
        index.emplace(std::move(text), lts.states.size() - 1);
        return lts.states.size() - 1;
    };

    intern(canonicalize_keys(start));
    for (std::size_t i = 0; i < lts.states.size(); ++i) {
        for (Transition& tr : all_transitions(lts.states[i], policy)) {
            std::size_t to = intern(canonicalize_keys(tr.target));
            if (to == Lts::npos) {
                lts.truncated = true;
                continue;
            }
            lts.edges.push_back({i, to, std::move(tr)});
        }
    }
    if (lts.truncated)
        lts.note = "state cap of " + std::to_string(max_states) +
                   " reached; the transition system is incomplete";
    return lts;
}

std::string lts_to_json(const Lts& l) {
    nlohmann::json j;
    j["initial"] = 0;
    j["truncated"] = l.truncated;
    if (!l.note.empty()) j["note"] = l.note;
    auto& states = j["states"] = nlohmann::json::array();
    for (const TermPtr& s : l.states) states.push_back(format_term(s));
    auto& edges = j["transitions"] = nlohmann::json::array();
    for (const LtsEdge& e : l.edges) {
        nlohmann::json je;
        je["from"] = e.from;
        je["to"] = e.to;
        je["direction"] = to_string(e.transition.label.dir);
        je["action"] = e.transition.label.action;
        je["rate"] = e.transition.label.rate;
        je["key"] = e.transition.label.key;
        auto& prov = je["provenance"] = nlohmann::json::array();
        for (const AstPath& p : e.transition.provenance)
            prov.push_back(std::vector<int>(p.begin(), p.end()));
        edges.push_back(std::move(je));
    }
    return j.dump(2);
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string lts_to_dot(const Lts& l) {
    std::string out = "digraph lts {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t i = 0; i < l.states.size(); ++i)
        out += "  s" + std::to_string(i) + " [label=\"" + dot_escape(format_term(l.states[i])) +
               "\"];\n";
    for (const LtsEdge& e : l.edges) {
        out += "  s" + std::to_string(e.from) + " -> s" + std::to_string(e.to) + " [label=\"" +
               dot_escape(format_label(e.transition.label)) + "\"";
        if (e.transition.label.dir == Direction::Backward) out += ", style=dashed";
        out += "];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace rmpc
