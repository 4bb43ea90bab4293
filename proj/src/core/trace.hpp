#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/causality.hpp"
#include "core/policy.hpp"
#include "core/semantics.hpp"
#include "core/term.hpp"

namespace rmpc {

// One requested step of a replay script.
struct ScriptStep {
    Direction dir = Direction::Forward;
    std::string action;
    Key key = 0;
    std::optional<double> rate;  // extra filter when present
};

// Parses {"steps": [{"direction": "forward", "action": "a", "key": 1,
// "rate": 2.0}, ...]}; "rate" is optional, "fw"/"bk" work as directions.
// A bare JSON list of steps is accepted too.
std::vector<ScriptStep> parse_script(const std::string& json_text);

struct ReplayReport {
    bool ok = false;
    std::string error;                 // set when a step failed to resolve
    std::size_t failed_step = 0;       // index of the failing step
    std::vector<std::string> enabled;  // labels enabled at the failure point
    Computation computation;
    std::vector<std::string> notes;    // e.g. ambiguous steps resolved leftmost
    bool returned_to_start = false;    // end key-equivalent to start
};

// Executes the script from `start`. Each step is matched against the enabled
// transitions by direction, action and key (and rate when given); with
// several matches the leftmost in derivation order is taken and a note is
// recorded. A forward step's key must be fresh in the current term.
ReplayReport replay_script(const TermPtr& start, const std::vector<ScriptStep>& script,
                           const BackwardRatePolicy& policy);

std::string replay_report_to_json(const ReplayReport& r,
                                  std::optional<bool> ref_equivalent = std::nullopt);

// Serializes a computation as its start term plus the list of step labels.
std::string computation_to_json(const Computation& w);

}  // namespace rmpc
