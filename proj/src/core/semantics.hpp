#pragma once

#include <string>
#include <vector>

#include "core/policy.hpp"
#include "core/term.hpp"

namespace rmpc {

enum class Direction { Forward, Backward };

inline const char* to_string(Direction d) {
    return d == Direction::Forward ? "forward" : "backward";
}

struct TransitionLabel {
    Direction dir = Direction::Forward;
    std::string action;
    double rate = 0.0;
    Key key = 0;

    bool operator==(const TransitionLabel&) const = default;
};

// One derivable step. `provenance` lists the paths of the prefixes that fired,
// sorted lexicographically: one path for a plain step, two or more when a
// synchronization fired prefixes in several components. A forward label's key
// is fresh in the source and present in the target; a backward label's key is
// present in the source and gone from the target.
struct Transition {
    TermPtr source;
    TransitionLabel label;
    TermPtr target;
    std::vector<AstPath> provenance;
};

bool same_transition(const Transition& a, const Transition& b);

std::string format_label(const TransitionLabel& l);

// All forward steps of t. Every returned transition uses the same fresh key,
// the smallest positive integer unused in t, which also makes the shared key
// of a synchronization hold by construction. Requires t well formed.
std::vector<Transition> forward_transitions(const TermPtr& t);

// All forward steps that mark the fired prefixes with the given key. The key
// must not occur in t. This is the general form: any fresh key yields a legal
// step; forward_transitions picks the smallest as the bundle representative.
std::vector<Transition> forward_transitions_with_key(const TermPtr& t, Key key);

// All backward steps of t: each undoes the most recently executed prefix of
// some component, with the rate assigned by the policy (synchronized undo
// multiplies the component rates). Requires t well formed.
std::vector<Transition> backward_transitions(const TermPtr& t, const BackwardRatePolicy& policy);

// forward_transitions followed by backward_transitions.
std::vector<Transition> all_transitions(const TermPtr& t, const BackwardRatePolicy& policy);

}  // namespace rmpc
