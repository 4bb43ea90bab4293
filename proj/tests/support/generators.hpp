#pragma once

#include <random>

#include "core/bisim.hpp"
#include "core/causality.hpp"
#include "core/policy.hpp"
#include "core/term.hpp"

namespace rmpc::testgen {

using Rng = std::mt19937_64;

// Random standard term over actions {a,b,c,d} with grid rates, at most
// max_prefixes prefixes and max_parallels parallel operators, at least one
// prefix. Resamples until exploration under the equal policy stays within
// max_states states.
TermPtr random_standard_term(Rng& rng, int max_prefixes = 6, int max_parallels = 2,
                             std::size_t max_states = 500);

// Same, but without any parallel operator.
TermPtr random_sequential_term(Rng& rng, int max_prefixes = 6);

// Parallel composition (possibly nested once) of sequential terms: parallel
// operators only ever at the top.
TermPtr random_outer_parallel_term(Rng& rng);

// Per-action multiplier table over {a,b,c,d} with values in [0.1, 10].
BackwardRatePolicy random_multiplier_policy(Rng& rng);

// Layered acyclic rated system: 2..8 states arranged in at most 5 layers,
// moves only from one layer to the next, every state reachable. All behavior
// is visible to run refinement at depth 5.
RatedLts random_layered_lts(Rng& rng);

// Behavior-preserving change: split a move's rate in two, or clone a state.
RatedLts equivalent_mutation(Rng& rng, const RatedLts& l);

// Behavior-changing perturbation: scale a rate, or relabel a move's action.
RatedLts perturbed_mutation(Rng& rng, const RatedLts& l);

// Random valid computation of at most max_len steps out of `start`, mixing
// forward and backward moves.
Computation random_computation(Rng& rng, const TermPtr& start, const BackwardRatePolicy& policy,
                               int max_len = 5);

}  // namespace rmpc::testgen
