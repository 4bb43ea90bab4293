#include "core/trace.hpp"

#include <charconv>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace rmpc {

namespace {

Direction parse_direction(const std::string& s) {
    if (s == "forward" || s == "fw") return Direction::Forward;
    if (s == "backward" || s == "bk") return Direction::Backward;
    throw ParseError("unknown direction '" + s + "' (use \"forward\" or \"backward\")");
}

ScriptStep parse_step(const nlohmann::json& j, std::size_t index) {
    if (!j.is_object())
        throw ParseError("step " + std::to_string(index) + ": expected an object");
    ScriptStep s;
    if (!j.contains("direction") || !j["direction"].is_string())
        throw ParseError("step " + std::to_string(index) + ": missing string field \"direction\"");
    s.dir = parse_direction(j["direction"].get<std::string>());
    if (!j.contains("action") || !j["action"].is_string())
        throw ParseError("step " + std::to_string(index) + ": missing string field \"action\"");
    s.action = j["action"].get<std::string>();
    if (!j.contains("key") || !j["key"].is_number_unsigned() || j["key"].get<std::uint64_t>() == 0)
        throw ParseError("step " + std::to_string(index) + ": \"key\" must be a positive integer");
    s.key = static_cast<Key>(j["key"].get<std::uint64_t>());
    if (j.contains("rate")) {
        if (!j["rate"].is_number() || j["rate"].get<double>() <= 0.0)
            throw ParseError("step " + std::to_string(index) + ": \"rate\" must be a positive number");
        s.rate = j["rate"].get<double>();
    }
    return s;
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<ScriptStep> parse_script(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("script is not valid JSON: ") + e.what());
    }
    const nlohmann::json* steps = nullptr;
    if (j.is_array()) {
        steps = &j;
    } else if (j.is_object() && j.contains("steps") && j["steps"].is_array()) {
        steps = &j["steps"];
    } else {
        throw ParseError("script must be a JSON list of steps or {\"steps\": [...]}");
    }
    std::vector<ScriptStep> out;
    out.reserve(steps->size());
    for (std::size_t i = 0; i < steps->size(); ++i) out.push_back(parse_step((*steps)[i], i));
    return out;
}

ReplayReport replay_script(const TermPtr& start, const std::vector<ScriptStep>& script,
                           const BackwardRatePolicy& policy) {
    ReplayReport rep;
    rep.computation.start = start;
    TermPtr current = start;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const ScriptStep& want = script[i];
        std::vector<Transition> enabled;
        if (want.dir == Direction::Forward) {
            const KeySet used = keys_of(*current);
            if (used.count(want.key)) {
                rep.error = "step " + std::to_string(i) + ": key " + std::to_string(want.key) +
                            " is already in use, cannot take a forward step with it";
                rep.failed_step = i;
                for (const Transition& t : forward_transitions(current))
                    rep.enabled.push_back(format_label(t.label));
                return rep;
            }
            enabled = forward_transitions_with_key(current, want.key);
        } else {
            enabled = backward_transitions(current, policy);
        }
        std::vector<Transition> matches;
        for (const Transition& t : enabled) {
            if (t.label.dir != want.dir || t.label.action != want.action || t.label.key != want.key)
                continue;
            if (want.rate && std::abs(t.label.rate - *want.rate) > 1e-12) continue;
            matches.push_back(t);
        }
        if (matches.empty()) {
            rep.error = "step " + std::to_string(i) + ": no enabled transition matches " +
                        (want.dir == Direction::Backward ? "~" : "") + "<" + want.action + "," +
                        (want.rate ? fmt_double(*want.rate) : std::string("*")) + ">[" +
                        std::to_string(want.key) + "]";
            rep.failed_step = i;
            // List everything enabled, both directions, to help fix the script.
            for (const Transition& t : forward_transitions(current))
                rep.enabled.push_back(format_label(t.label));
            for (const Transition& t : backward_transitions(current, policy))
                rep.enabled.push_back(format_label(t.label));
            return rep;
        }
        if (matches.size() > 1)
            rep.notes.push_back("step " + std::to_string(i) + ": " +
                                std::to_string(matches.size()) +
                                " transitions match; taking the leftmost");
        rep.computation.steps.push_back(matches.front());
        current = matches.front().target;
    }
    rep.ok = true;
    rep.returned_to_start = key_equivalent(start, current);
    return rep;
}

std::string replay_report_to_json(const ReplayReport& r, std::optional<bool> ref_equivalent) {
    nlohmann::json j;
    j["ok"] = r.ok;
    if (!r.ok) {
        j["error"] = r.error;
        j["failedStep"] = r.failed_step;
        j["enabled"] = r.enabled;
    }
    j["start"] = format_term(*r.computation.start);
    nlohmann::json steps = nlohmann::json::array();
    for (const Transition& t : r.computation.steps) {
        nlohmann::json s;
        s["direction"] = to_string(t.label.dir);
        s["action"] = t.label.action;
        s["rate"] = t.label.rate;
        s["key"] = t.label.key;
        s["target"] = format_term(*t.target);
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    if (!r.computation.steps.empty())
        j["end"] = format_term(*r.computation.end());
    else
        j["end"] = format_term(*r.computation.start);
    j["validComputation"] = r.computation.valid();
    j["returnedToStart"] = r.returned_to_start;
    if (!r.notes.empty()) j["notes"] = r.notes;
    if (ref_equivalent) j["refCausallyEquivalent"] = *ref_equivalent;
    return j.dump(2);
}

std::string computation_to_json(const Computation& w) {
    nlohmann::json j;
    j["start"] = format_term(*w.start);
    nlohmann::json steps = nlohmann::json::array();
    for (const Transition& t : w.steps) {
        nlohmann::json s;
        s["direction"] = to_string(t.label.dir);
        s["action"] = t.label.action;
        s["rate"] = t.label.rate;
        s["key"] = t.label.key;
        s["target"] = format_term(*t.target);
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    j["end"] = format_term(*w.end());
    return j.dump(2);
}

}  // namespace rmpc
