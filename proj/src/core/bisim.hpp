#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/ctmc.hpp"

namespace rmpc {

inline constexpr double kRateCompareTol = 1e-12;
inline constexpr std::size_t kDefaultRunDepth = 4;

struct RatedMove {
    std::size_t from = 0;
    std::string action;
    double rate = 0.0;
    std::size_t to = 0;
};

// Action-labelled rated transition system: the forward fragment of a chain,
// or any hand-built system. Moves form a multiset; duplicate entries count
// separately in every rate sum.
struct RatedLts {
    std::size_t num_states = 0;
    std::size_t initial = 0;
    std::vector<RatedMove> moves;
    std::vector<std::string> state_names;  // optional; sized num_states when present

    static RatedLts from_ctmc(const Ctmc& c);
};

// Total rate from state s with action a into the set of states `into`
// (given as a membership mask).
double rate_to_class(const RatedLts& l, std::size_t s, const std::string& a,
                     const std::vector<bool>& into);

// Coarsest partition such that states in one block have equal rates into
// every block for every action. One block id per state.
std::vector<std::size_t> mb_partition(const RatedLts& l, double tol = kRateCompareTol);

struct MbWitness {
    std::string action;
    std::size_t block = 0;
    double rate_left = 0.0;
    double rate_right = 0.0;
};

// Verdict plus final partition over the disjoint union: states of `a` keep
// their ids, states of `b` are offset by a.num_states.
struct MbResult {
    bool equivalent = false;
    std::vector<std::size_t> block_of_state;
    std::size_t num_blocks = 0;
    std::optional<MbWitness> witness;  // set when distinguished
};

MbResult mb_equivalent(const RatedLts& a, const RatedLts& b, double tol = kRateCompareTol);

// A run: a composable sequence of moves out of a start state. `moves` holds
// indices into the owning system's move list.
struct Run {
    std::size_t origin = 0;
    std::vector<std::size_t> moves;
};

struct FbmbResult {
    bool equivalent = false;
    // when distinguished: the smallest run-length budget that separates the
    // two systems; when equivalent: the full depth that was checked
    std::size_t depth = 0;
};

// Back-and-forth check over runs: refines equivalence classes of all runs of
// both systems by outgoing rates and by the rate of the incoming step, with
// run length bounded by `depth`. Distinguishing by incoming rates is what
// separates systems that plain Markovian bisimilarity equates.
FbmbResult fbmb_check(const RatedLts& a, const RatedLts& b, std::size_t depth,
                      double tol = kRateCompareTol);

// Back-and-forth equivalence where the incoming direction only tests the
// existence of the incoming step, not its rate. Coincides with Markovian
// bisimilarity; decided through mb_equivalent and cross-checked against a
// direct run-based refinement to `audit_depth`. Throws AuditError when the
// two procedures disagree.
bool ftabmb_equivalent(const RatedLts& a, const RatedLts& b,
                       std::size_t audit_depth = kDefaultRunDepth, double tol = kRateCompareTol);

struct ColoredStep {
    std::size_t from_block = 0;
    std::string action;
    double rate = 0.0;
    std::size_t to_block = 0;
};

// The run's steps with states replaced by their blocks. Runs with equal
// colored traces are related by the run-based equivalences.
std::vector<ColoredStep> colored_trace(const RatedLts& l,
                                       const std::vector<std::size_t>& block_of_state,
                                       const Run& run);

std::string partition_to_json(const RatedLts& a, const RatedLts& b, const MbResult& result);

}  // namespace rmpc
