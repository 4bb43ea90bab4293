#pragma once

#include <optional>
#include <vector>

#include "core/semantics.hpp"
#include "core/term.hpp"

namespace rmpc {

// Keys of the already-executed prefixes that the execution step keyed `k`
// depends on: everything keyed above it on its branch, gathered across the
// whole term. Empty when k does not occur in t.
KeySet causal_set(const TermPtr& t, Key k);

// Two transitions with equal source terms, at least one of them distinct from
// the other. They are in conflict when
//   - one moves forward to S1 with key i, the other undoes key j, and j is in
//     the causal set of i inside S1 (the undo would remove a cause), or
//   - both move forward and their provenances split at a choice operator
//     (they commit the two branches of the same choice).
// Throws std::invalid_argument unless coinitial and distinct.
bool conflicting(const Transition& t1, const Transition& t2);

// Coinitial, distinct and not in conflict.
bool concurrent(const Transition& t1, const Transition& t2);

struct Diamond {
    Transition second_after_first;  // fires t2's step from t1's target
    Transition first_after_second;  // fires t1's step from t2's target
    TermPtr join;                   // common canonical endpoint
};

// Completes the commuting square for two concurrent transitions. The residual
// steps fire the same prefixes with the same action and rate; a forward
// residual may carry a different fresh key, which the canonical join absorbs.
// Throws std::invalid_argument for conflicting inputs, AuditError if no
// matching residual exists or the two residual targets disagree.
Diamond complete_diamond(const Transition& t1, const Transition& t2,
                         const BackwardRatePolicy& policy);

// A chained run: steps[0].source == start and each step starts at the
// previous step's target (all comparisons structural).
struct Computation {
    TermPtr start;
    std::vector<Transition> steps;

    TermPtr end() const { return steps.empty() ? start : steps.back().target; }
    bool valid() const;
};

// Rewrites w into an equivalent backward-then-forward computation by
// cancelling adjacent inverse pairs and commuting forward-before-backward
// pairs. Never longer than the input; start and end terms are unchanged.
Computation normalize_parabolic(const Computation& w);

// Sound and complete decision: two valid computations are causally equivalent
// iff their start terms are key-equivalent and their end terms are too.
bool causally_equivalent(const Computation& w1, const Computation& w2);

enum class AuditVerdict { Equivalent, NotEquivalent, BudgetExhausted };

// Independent oracle: searches for an explicit chain of commutations and
// cancellations connecting the two computations, comparing them up to the
// choice of fresh keys. `budget` caps the number of visited rewrite states.
AuditVerdict audit_causally_equivalent(const Computation& w1, const Computation& w2,
                                       std::size_t budget = 10000);

}  // namespace rmpc
