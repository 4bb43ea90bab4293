#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/policy.hpp"
#include "core/semantics.hpp"
#include "core/term.hpp"

namespace rmpc {

inline constexpr std::size_t kDefaultMaxStates = 10000;

// An edge between two explored states. `transition` is the raw derivation out
// of the canonical source term: its target is the successor before key
// canonicalization, so the label key refers to the source state's numbering.
struct LtsEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    Transition transition;
};

// Reachable fragment of the transition system, states quotiented by key
// equivalence. State 0 is the (canonicalized) start term; discovery order is
// breadth first following derivation order, so exploration is deterministic.
struct Lts {
    std::vector<TermPtr> states;
    std::vector<LtsEdge> edges;
    bool truncated = false;
    std::string note;

    std::size_t state_index(const TermPtr& canonical_term) const;  // npos when absent
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Breadth-first closure of all_transitions, canonicalizing every state before
// insertion. Stops at max_states and marks the result truncated.
Lts explore(const TermPtr& start, const BackwardRatePolicy& policy,
            std::size_t max_states = kDefaultMaxStates);

std::string lts_to_json(const Lts& l);

// Graphviz rendering: forward edges solid, backward edges dashed.
std::string lts_to_dot(const Lts& l);

}  // namespace rmpc
