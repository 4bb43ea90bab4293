#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/lts.hpp"
#include "core/policy.hpp"
#include "core/term.hpp"

namespace rmpc {

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultCycleBound = 6;

struct CtmcMove {
    std::size_t from = 0;
    std::size_t to = 0;
    Direction dir = Direction::Forward;
    std::string action;
    double rate = 0.0;
};

// Continuous-time Markov chain. Moves keep their action and direction as
// metadata; the generator aggregates rates. Kept as a list, not a set: moves
// with identical endpoints and rates still contribute separately.
struct Ctmc {
    std::vector<std::string> state_names;
    std::vector<TermPtr> state_terms;  // empty for hand-built chains
    std::size_t initial = 0;
    std::vector<CtmcMove> moves;
    std::vector<double> generator;  // dense, row major, n*n

    std::size_t size() const { return state_names.size(); }
    double q(std::size_t i, std::size_t j) const { return generator[i * size() + j]; }
};

// Validates the moves, fills in the generator (off-diagonal sums, diagonal
// the negated row sum).
Ctmc make_ctmc(std::vector<std::string> state_names, std::size_t initial,
               std::vector<CtmcMove> moves);

// Explores the term and drops keys from the labels; each explored edge
// becomes one move. Throws TruncatedError when the state cap is hit.
Ctmc build_ctmc(const TermPtr& start, const BackwardRatePolicy& policy,
                std::size_t max_states = kDefaultMaxStates);

struct JumpProbability {
    std::size_t move_index;
    double probability;
};

struct StateMetrics {
    double exit_rate = 0.0;
    double mean_sojourn = 0.0;  // +inf for absorbing states
    std::vector<JumpProbability> jumps;
};

StateMetrics state_metrics(const Ctmc& c, std::size_t state);

// True when every state reaches every other through moves (one state with no
// moves counts as ergodic).
bool is_ergodic(const Ctmc& c);

// Solves the global balance equations pi*Q = 0 with sum(pi) = 1 by dense LU
// with partial pivoting, the last balance column replaced by the
// normalization. Requires ergodicity; checks the residual against tol.
std::vector<double> steady_state(const Ctmc& c, double tol = kDefaultTolerance);

struct DetailedBalanceViolation {
    std::size_t s1 = 0, s2 = 0;
    double residual = 0.0;
};

struct CycleViolation {
    std::vector<std::size_t> states;  // in cycle order
    double forward_product = 0.0;
    double reverse_product = 0.0;
};

struct ReversibilityReport {
    bool reversible = false;
    double max_detailed_balance_residual = 0.0;
    std::vector<DetailedBalanceViolation> failing_pairs;
    std::vector<CycleViolation> failing_cycles;
    double tolerance = kDefaultTolerance;
    std::size_t cycle_bound = kDefaultCycleBound;
};

// Detailed balance over every state pair plus equality of the two directed
// products over every simple cycle up to max_cycle_len.
ReversibilityReport check_time_reversibility(const Ctmc& c, const std::vector<double>& pi,
                                             double tol = kDefaultTolerance,
                                             std::size_t max_cycle_len = kDefaultCycleBound);

// The time-reversed chain: each move from i to j becomes a move from j to i
// with rate scaled by pi[i]/pi[j]. Reversing twice restores the original.
Ctmc reverse_ctmc(const Ctmc& c, const std::vector<double>& pi);

enum class SyntaxClass {
    Sequential,      // no parallel operator at all
    ParallelOuter,   // parallel occurs, but never under a prefix or choice
    General,
};

SyntaxClass classify_syntax(const TermPtr& t);

struct ProductFormReport {
    bool precondition_ok = false;
    std::string precondition_note;
    bool cartesian = false;      // composed states = product of component states
    bool product_form = false;   // pi factorizes within tolerance
    double max_error = 0.0;
    std::size_t component_states_1 = 0;
    std::size_t component_states_2 = 0;
    std::size_t composed_states = 0;
};

// Checks whether the composition of two standard terms has a product-form
// steady state: the composed state space must be the Cartesian product of the
// component spaces and every probability must factorize. The hypotheses ask
// for the equal policy or two sequential components.
ProductFormReport check_product_form(const TermPtr& r1, const TermPtr& r2,
                                     std::vector<std::string> sync,
                                     const BackwardRatePolicy& policy,
                                     double tol = kDefaultTolerance,
                                     std::size_t max_states = kDefaultMaxStates);

std::string ctmc_to_json(const Ctmc& c);
// Inverse of ctmc_to_json for hand-written chain files: reads {states,
// initial, moves} (generator and n are recomputed, extra fields ignored) and
// validates through make_ctmc. Throws ParseError on malformed input.
Ctmc ctmc_from_json(const std::string& json_text);
std::string steady_state_to_csv(const Ctmc& c, const std::vector<double>& pi);
std::string reversibility_report_to_json(const ReversibilityReport& r);
std::string reversibility_report_to_text(const ReversibilityReport& r);

}  // namespace rmpc
