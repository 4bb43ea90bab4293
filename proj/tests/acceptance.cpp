// Acceptance gate: one self-contained check per shipped guarantee, one
// PASS/FAIL line each, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core/bisim.hpp"
#include "core/causality.hpp"
#include "core/ctmc.hpp"
#include "core/errors.hpp"
#include "core/lts.hpp"
#include "core/parser.hpp"
#include "core/policy.hpp"
#include "core/semantics.hpp"
#include "core/term.hpp"
#include "core/trace.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace rmpc;

namespace {

int failures = 0;

void report(int number, const char* what, bool ok, const std::string& detail = "") {
    std::printf("%s  %2d  %s%s%s\n", ok ? "PASS" : "FAIL", number, what,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++failures;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string model_path(const char* name) { return std::string(RMPC_MODELS_DIR "/") + name; }

// Shared corpus for criteria 1-3 and 7: standard terms with at most 6
// prefixes and 2 parallel operators, explored to at most 500 states.
std::vector<TermPtr> corpus(std::size_t count, std::uint64_t seed) {
    testgen::Rng rng(seed);
    std::vector<TermPtr> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(testgen::random_standard_term(rng, 6, 2, 500));
    return out;
}

// ---- criterion 1: every step has exactly one inverse ----------------------

bool check_loop(const std::vector<TermPtr>& terms, std::string& detail) {
    auto policy = BackwardRatePolicy::equal();
    std::size_t states_checked = 0, steps_checked = 0;
    for (const TermPtr& t : terms) {
        Lts l = explore(t, policy, 500);
        if (l.truncated) {
            detail = "corpus exploration truncated";
            return false;
        }
        for (const TermPtr& s : l.states) {
            ++states_checked;
            for (const Transition& f : forward_transitions(s)) {
                ++steps_checked;
                int inverses = 0;
                for (const Transition& b : backward_transitions(f.target, policy))
                    if (b.label.action == f.label.action && b.label.key == f.label.key &&
                        b.label.rate == f.label.rate && equal(b.target, s))
                        ++inverses;
                if (inverses != 1) {
                    detail = "forward step with " + std::to_string(inverses) + " inverses at " +
                             format_term(s);
                    return false;
                }
            }
            for (const Transition& b : backward_transitions(s, policy)) {
                ++steps_checked;
                int inverses = 0;
                for (const Transition& f : forward_transitions_with_key(b.target, b.label.key))
                    if (f.label.action == b.label.action && f.label.rate == b.label.rate &&
                        equal(f.target, s))
                        ++inverses;
                if (inverses != 1) {
                    detail = "backward step with " + std::to_string(inverses) + " inverses at " +
                             format_term(s);
                    return false;
                }
            }
        }
    }
    detail = std::to_string(terms.size()) + " terms, " + std::to_string(states_checked) +
             " states, " + std::to_string(steps_checked) + " steps";
    return true;
}

// ---- criterion 2: uniform steady state under the equal policy -------------

bool check_uniform(const std::vector<TermPtr>& terms, std::string& detail) {
    double worst = 0.0;
    for (const TermPtr& t : terms) {
        Ctmc c = build_ctmc(t, BackwardRatePolicy::equal(), 500);
        std::vector<double> pi = steady_state(c);
        double uniform = 1.0 / static_cast<double>(c.size());
        for (double p : pi) worst = std::max(worst, std::abs(p - uniform));
    }
    detail = "max |pi - 1/n| = " + std::to_string(worst);
    return worst <= 1e-9;
}

// ---- criterion 3: equal policy implies time reversibility -----------------

bool check_reversibility_equal(const std::vector<TermPtr>& terms, std::string& detail) {
    double worst = 0.0;
    for (const TermPtr& t : terms) {
        Ctmc c = build_ctmc(t, BackwardRatePolicy::equal(), 500);
        std::vector<double> pi = steady_state(c);
        ReversibilityReport r = check_time_reversibility(c, pi, 1e-9, 6);
        worst = std::max(worst, r.max_detailed_balance_residual);
        if (!r.reversible || !r.failing_pairs.empty() || !r.failing_cycles.empty()) {
            detail = "violation on " + format_term(t);
            return false;
        }
    }
    detail = "worst balance residual = " + std::to_string(worst);
    return true;
}

// ---- criterion 4: sequential terms reversible under any policy ------------

bool check_reversibility_sequential(std::string& detail) {
    testgen::Rng rng(40202);
    for (int i = 0; i < 100; ++i) {
        TermPtr t = testgen::random_sequential_term(rng);
        BackwardRatePolicy policy = testgen::random_multiplier_policy(rng);
        Ctmc c = build_ctmc(t, policy, 500);
        if (!testoracle::forward_moves_form_tree(c)) {
            detail = "forward moves not tree-shaped for " + format_term(t);
            return false;
        }
        ReversibilityReport r = check_time_reversibility(c, steady_state(c));
        if (!r.reversible) {
            detail = "not reversible: " + format_term(t);
            return false;
        }
    }
    detail = "100 sequential terms, multipliers in [0.1, 10]";
    return true;
}

// ---- criterion 5: the skewed three-state chain breaks the cycle rule ------

bool check_cycle_counterexample(std::string& detail) {
    Ctmc c = make_ctmc({"idle", "halfway", "done"}, 0,
                       {{0, 1, Direction::Forward, "a", 1.0},
                        {1, 2, Direction::Forward, "b", 1.0},
                        {0, 2, Direction::Forward, "c", 1.0},
                        {1, 0, Direction::Backward, "a", 1.0},
                        {2, 1, Direction::Backward, "b", 1.0},
                        {2, 0, Direction::Backward, "c", 2.0}});
    ReversibilityReport r = check_time_reversibility(c, steady_state(c));
    if (r.reversible) {
        detail = "chain reported reversible";
        return false;
    }
    for (const CycleViolation& v : r.failing_cycles) {
        if (v.states.size() != 3) continue;
        double hi = std::max(v.forward_product, v.reverse_product);
        double lo = std::min(v.forward_product, v.reverse_product);
        if (std::abs(hi - 2.0) <= 1e-12 && std::abs(lo - 1.0) <= 1e-12) {
            detail = "3-cycle products 2 vs 1";
            return true;
        }
    }
    detail = "no 3-cycle witness with products 2 and 1";
    return false;
}

// ---- criterion 6: product form for an independent composition -------------

bool check_product_form_case(std::string& detail) {
    ProductFormReport r = check_product_form(parse_term("<a,1>.0"), parse_term("<b,2>.0"), {},
                                             BackwardRatePolicy::equal());
    bool ok = r.precondition_ok && r.cartesian && r.product_form && r.composed_states == 4 &&
              r.max_error <= 1e-9;
    detail = "2x2 = " + std::to_string(r.composed_states) +
             " states, max factorization error = " + std::to_string(r.max_error);
    return ok;
}

// ---- criterion 7: conflict xor commuting square ---------------------------

bool check_diamonds(const std::vector<TermPtr>& terms, std::string& detail) {
    auto policy = BackwardRatePolicy::equal();
    std::size_t pairs = 0, conflicts = 0, squares = 0;
    for (const TermPtr& t : terms) {
        Lts l = explore(t, policy, 500);
        for (const TermPtr& s : l.states) {
            std::vector<Transition> ts = all_transitions(s, policy);
            for (std::size_t x = 0; x < ts.size(); ++x) {
                for (std::size_t y = x + 1; y < ts.size(); ++y) {
                    ++pairs;
                    bool in_conflict = conflicting(ts[x], ts[y]);
                    bool square_ok = false;
                    try {
                        Diamond d = complete_diamond(ts[x], ts[y], policy);
                        square_ok = equal(d.join, canonicalize_keys(d.second_after_first.target)) &&
                                    equal(d.join, canonicalize_keys(d.first_after_second.target));
                    } catch (const std::invalid_argument&) {
                    } catch (const AuditError&) {
                    }
                    if (in_conflict == square_ok) {
                        detail = "conflict=" + std::to_string(in_conflict) +
                                 " square=" + std::to_string(square_ok) + " at " + format_term(s);
                        return false;
                    }
                    if (ts[x].label.dir == Direction::Backward &&
                        ts[y].label.dir == Direction::Backward && !concurrent(ts[x], ts[y])) {
                        detail = "backward pair in conflict at " + format_term(s);
                        return false;
                    }
                    (in_conflict ? conflicts : squares)++;
                }
            }
        }
    }
    detail = std::to_string(pairs) + " coinitial pairs: " + std::to_string(squares) +
             " squares, " + std::to_string(conflicts) + " conflicts";
    return pairs > 0;
}

// ---- criterion 8: endpoint decision matches the rewrite-search audit ------

bool check_causal_consistency(std::string& detail) {
    testgen::Rng rng(88001);
    auto policy = BackwardRatePolicy::equal();
    int checked = 0;
    while (checked < 100) {
        TermPtr start = testgen::random_standard_term(rng);
        Computation w1 = testgen::random_computation(rng, start, policy, 5);
        Computation w2 = (checked % 2 == 0)
                             ? normalize_parabolic(w1)
                             : testgen::random_computation(rng, start, policy, 5);
        bool decided = causally_equivalent(w1, w2);
        AuditVerdict audited = audit_causally_equivalent(w1, w2);
        if (audited == AuditVerdict::BudgetExhausted) {
            detail = "audit budget exhausted on a length-5 computation";
            return false;
        }
        if (decided != (audited == AuditVerdict::Equivalent)) {
            detail = "verdicts disagree from start " + format_term(start);
            return false;
        }
        ++checked;
    }
    detail = "100 computation pairs of length <= 5";
    return true;
}

// ---- criterion 9: the three relations on the two flagship pairs -----------

bool check_bisim_triple(std::string& detail) {
    auto policy = BackwardRatePolicy::equal();
    RatedLts par =
        RatedLts::from_ctmc(build_ctmc(parse_term("<a,1>.0 |[]| <b,2>.0"), policy));
    RatedLts cho = RatedLts::from_ctmc(
        build_ctmc(parse_term("<a,1>.<b,2>.0 + <b,2>.<a,1>.0"), policy));
    if (!mb_equivalent(par, cho).equivalent) {
        detail = "expansion pair not mb-equivalent";
        return false;
    }
    if (!ftabmb_equivalent(par, cho)) {
        detail = "expansion pair not ftabmb-equivalent";
        return false;
    }
    FbmbResult deep = fbmb_check(par, cho, 4);
    if (!deep.equivalent || deep.depth != 4) {
        detail = "expansion pair fbmb verdict not equivalent-up-to-depth 4";
        return false;
    }

    RatedLts split = testoracle::make_split_chain();
    RatedLts sum = testoracle::make_sum_chain();
    std::multiset<double> split_rates, sum_rates;
    for (const RatedMove& m : split.moves) split_rates.insert(m.rate);
    for (const RatedMove& m : sum.moves) sum_rates.insert(m.rate);
    if (split_rates != std::multiset<double>{1.0, 2.0} ||
        sum_rates != std::multiset<double>{3.0}) {
        detail = "split/sum chains do not carry step rates 1, 2 and 3";
        return false;
    }
    if (!mb_equivalent(split, sum).equivalent || !ftabmb_equivalent(split, sum)) {
        detail = "split/sum pair should satisfy mb and ftabmb";
        return false;
    }
    FbmbResult fb = fbmb_check(split, sum, 2);
    if (fb.equivalent || fb.depth != 1) {
        detail = "split/sum pair should be fbmb-distinguished at depth 1";
        return false;
    }
    detail = "expansion pair: mb/ftabmb/fbmb@4; split vs sum: distinguished at 1";
    return true;
}

// ---- criterion 10: run-based and partition checkers coincide --------------

bool check_coincidence(std::string& detail) {
    testgen::Rng rng(1000003);
    int agreements = 0, equivalent_pairs = 0;
    for (int i = 0; i < 100; ++i) {
        RatedLts l = testgen::random_layered_lts(rng);
        RatedLts m;
        switch (i % 3) {
            case 0: m = testgen::equivalent_mutation(rng, l); break;
            case 1: m = testgen::perturbed_mutation(rng, l); break;
            default: m = testgen::random_layered_lts(rng); break;
        }
        bool mb = mb_equivalent(l, m).equivalent;
        bool direct;
        try {
            // depth 5 covers these systems completely: no run exceeds 4 steps
            direct = ftabmb_equivalent(l, m, 5);
        } catch (const AuditError& e) {
            detail = std::string("checkers disagree: ") + e.what();
            return false;
        }
        if (direct != mb) {
            detail = "verdicts differ on pair " + std::to_string(i);
            return false;
        }
        ++agreements;
        if (mb) ++equivalent_pairs;
    }
    detail = "100 pairs, " + std::to_string(equivalent_pairs) + " equivalent";
    return agreements == 100 && equivalent_pairs >= 10 && equivalent_pairs <= 90;
}

// ---- criterion 11: corpus replays -----------------------------------------

bool check_replays(std::string& detail) {
    auto policy = BackwardRatePolicy::equal();

    TermPtr twophase = parse_model(read_file(model_path("twophase.rmpc")));
    auto rollback = parse_script(read_file(model_path("twophase-rollback.json")));
    ReplayReport r = replay_script(twophase, rollback, policy);
    if (!r.ok) {
        detail = "two-phase rollback failed: " + r.error;
        return false;
    }
    if (!r.returned_to_start) {
        detail = "two-phase rollback did not return to the initial term";
        return false;
    }

    TermPtr net = parse_model(read_file(model_path("protein.rmpc")));
    auto lifo = parse_script(read_file(model_path("protein-cycle-lifo.json")));
    auto fifo = parse_script(read_file(model_path("protein-cycle-fifo.json")));
    ReplayReport r1 = replay_script(net, lifo, policy);
    ReplayReport r2 = replay_script(net, fifo, policy);
    if (!r1.ok || !r2.ok) {
        detail = "binding-site replay failed";
        return false;
    }
    if (!r1.returned_to_start || !r2.returned_to_start) {
        detail = "an unbinding order did not restore the network";
        return false;
    }
    if (!causally_equivalent(r1.computation, r2.computation)) {
        detail = "the two unbinding orders are not causally equivalent";
        return false;
    }
    detail = "12-step commit rollback; both unbinding orders restore the network";
    return true;
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();

    std::vector<TermPtr> shared = corpus(200, 20240601);

    std::string detail;
    bool ok;

    ok = check_loop(shared, detail);
    report(1, "every step has exactly one inverse", ok, detail);

    ok = check_uniform(shared, detail);
    report(2, "equal policy: steady state uniform within 1e-9", ok, detail);

    ok = check_reversibility_equal(shared, detail);
    report(3, "equal policy: detailed balance and cycle products hold", ok, detail);

    ok = check_reversibility_sequential(detail);
    report(4, "sequential terms reversible under random policies", ok, detail);

    ok = check_cycle_counterexample(detail);
    report(5, "skewed shared-finish chain fails with cycle products 2 vs 1", ok, detail);

    ok = check_product_form_case(detail);
    report(6, "independent composition factorizes its steady state", ok, detail);

    ok = check_diamonds(shared, detail);
    report(7, "coinitial pairs: conflict or commuting square, never both", ok, detail);

    ok = check_causal_consistency(detail);
    report(8, "endpoint decision agrees with the rewrite-search audit", ok, detail);

    ok = check_bisim_triple(detail);
    report(9, "flagship pairs across the three relations", ok, detail);

    ok = check_coincidence(detail);
    report(10, "run-based checker coincides with partition refinement", ok, detail);

    ok = check_replays(detail);
    report(11, "commit rollback and binding-site replays", ok, detail);

    auto seconds =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count() / 1000.0;
    std::printf("%s (%d of 11 criteria, %.1fs)\n", failures == 0 ? "ALL PASS" : "FAILURES",
                11 - failures, seconds);
    return failures == 0 ? 0 : 1;
}
