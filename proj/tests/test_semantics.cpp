#include <doctest.h>

#include <algorithm>
#include <set>

#include "core/lts.hpp"
#include "core/parser.hpp"
#include "core/policy.hpp"
#include "core/semantics.hpp"
#include "core/term.hpp"
#include "support/generators.hpp"

using namespace rmpc;

namespace {

// Count forward/backward edges of an Lts.
std::pair<int, int> edge_counts(const Lts& l) {
    int fw = 0, bk = 0;
    for (const LtsEdge& e : l.edges)
        (e.transition.label.dir == Direction::Forward ? fw : bk)++;
    return {fw, bk};
}

}  // namespace

TEST_CASE("forward_transitions: single prefix") {
    auto ts = forward_transitions(parse_term("<a,2.0>.0"));
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].label.dir == Direction::Forward);
    CHECK(ts[0].label.action == "a");
    CHECK(ts[0].label.rate == 2.0);
    CHECK(ts[0].label.key == 1);
    CHECK(equal(ts[0].target, parse_term("<a,2.0>[1].0")));
    CHECK(ts[0].provenance == std::vector<AstPath>{{}});
}

TEST_CASE("forward_transitions: choice keeps the dead branch") {
    auto ts = forward_transitions(parse_term("<a,1>.0 + <b,2>.0"));
    REQUIRE(ts.size() == 2);
    CHECK(equal(ts[0].target, parse_term("<a,1>[1].0 + <b,2>.0")));
    CHECK(equal(ts[1].target, parse_term("<a,1>.0 + <b,2>[1].0")));
    CHECK(ts[0].label.key == ts[1].label.key);  // one fresh key per bundle
}

TEST_CASE("forward_transitions: synchronization multiplies rates and shares the key") {
    auto ts = forward_transitions(parse_term("<a,2>.0 |[a]| <a,3>.0"));
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].label.action == "a");
    CHECK(ts[0].label.rate == 6.0);
    CHECK(equal(ts[0].target, parse_term("<a,2>[1].0 |[a]| <a,3>[1].0")));
    CHECK(ts[0].provenance.size() == 2);
}

TEST_CASE("forward_transitions: sync set without a partner blocks") {
    CHECK(forward_transitions(parse_term("<a,1>.0 |[a,b]| <b,1>.0")).empty());
    // Actions outside the sync set still interleave, so |[a]| only blocks a.
    auto partial = forward_transitions(parse_term("<a,1>.0 |[a]| <b,1>.0"));
    REQUIRE(partial.size() == 1);
    CHECK(partial[0].label.action == "b");
    CHECK(forward_transitions(parse_term("<a,1>.0 |[]| <b,1>.0")).size() == 2);
}

TEST_CASE("forward_transitions_with_key respects freshness") {
    TermPtr t = parse_term("<a,1>[2].<b,1>.0");
    auto ts = forward_transitions_with_key(t, 7);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].label.key == 7);
    CHECK_THROWS(forward_transitions_with_key(t, 2));
}

TEST_CASE("backward_transitions: undoes the last prefix at the policy rate") {
    auto ts = backward_transitions(parse_term("<a,2.0>[1].0"), BackwardRatePolicy::equal());
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].label.dir == Direction::Backward);
    CHECK(ts[0].label.action == "a");
    CHECK(ts[0].label.rate == 2.0);
    CHECK(ts[0].label.key == 1);
    CHECK(equal(ts[0].target, parse_term("<a,2.0>.0")));

    auto policy = BackwardRatePolicy::multipliers({{"a", 2.0}}, 1.0);
    auto scaled = backward_transitions(parse_term("<a,2.0>[1].0"), policy);
    REQUIRE(scaled.size() == 1);
    CHECK(scaled[0].label.rate == 4.0);
}

TEST_CASE("backward_transitions: only the most recent prefix of a component") {
    auto ts = backward_transitions(parse_term("<a,1>[1].<b,2>[2].0"), BackwardRatePolicy::equal());
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].label.action == "b");
    CHECK(ts[0].label.key == 2);

    // Independent components each expose their own last step.
    auto par = backward_transitions(parse_term("<a,1>[1].0 |[]| <b,2>[2].0"),
                                    BackwardRatePolicy::equal());
    CHECK(par.size() == 2);

    // Synchronized undo multiplies component rates.
    auto sync = backward_transitions(parse_term("<a,2>[1].0 |[a]| <a,3>[1].0"),
                                     BackwardRatePolicy::equal());
    REQUIRE(sync.size() == 1);
    CHECK(sync[0].label.rate == 6.0);
    CHECK(equal(sync[0].target, parse_term("<a,2>.0 |[a]| <a,3>.0")));
}

TEST_CASE("all_transitions lists forward steps first") {
    auto ts = all_transitions(parse_term("<a,1>[1].<b,1>.0"), BackwardRatePolicy::equal());
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].label.dir == Direction::Forward);
    CHECK(ts[0].label.action == "b");
    CHECK(ts[1].label.dir == Direction::Backward);
    CHECK(ts[1].label.action == "a");
}

TEST_CASE("explore: independent parallel actions form a four-state diamond") {
    Lts l = explore(parse_term("<a,1>.0 |[]| <b,2>.0"), BackwardRatePolicy::equal());
    CHECK(l.states.size() == 4);
    CHECK(!l.truncated);
    auto [fw, bk] = edge_counts(l);
    CHECK(fw == 4);
    CHECK(bk == 4);
}

TEST_CASE("explore: choice between interleavings has five states") {
    Lts l = explore(parse_term("<a,1>.<b,1>.0 + <b,1>.<a,1>.0"), BackwardRatePolicy::equal());
    CHECK(l.states.size() == 5);
}

TEST_CASE("explore: blocked synchronization leaves a single state") {
    Lts l = explore(parse_term("<a,1>.0 |[a,b]| <b,1>.0"), BackwardRatePolicy::equal());
    CHECK(l.states.size() == 1);
    CHECK(l.edges.empty());
    // With only a in the sync set, b interleaves and can be undone again.
    Lts half = explore(parse_term("<a,1>.0 |[a]| <b,1>.0"), BackwardRatePolicy::equal());
    CHECK(half.states.size() == 2);
    CHECK(half.edges.size() == 2);
}

TEST_CASE("explore: truncation is reported") {
    Lts l = explore(parse_term("<a,1>.0 |[]| <b,1>.0"), BackwardRatePolicy::equal(), 2);
    CHECK(l.truncated);
    CHECK(l.states.size() == 2);
    CHECK(!l.note.empty());
}

TEST_CASE("every forward step can be undone immediately (loop property)") {
    testgen::Rng rng(90125);
    auto policy = BackwardRatePolicy::equal();
    for (int i = 0; i < 40; ++i) {
        TermPtr t = testgen::random_standard_term(rng);
        Lts l = explore(t, policy, 500);
        for (const TermPtr& s : l.states) {
            for (const Transition& f : forward_transitions(s)) {
                bool undone = false;
                for (const Transition& b : backward_transitions(f.target, policy)) {
                    if (b.label.action == f.label.action && b.label.key == f.label.key &&
                        equal(b.target, s))
                        undone = true;
                }
                CHECK(undone);
            }
            // And the other way: every backward step can be redone.
            for (const Transition& b : backward_transitions(s, policy)) {
                bool redone = false;
                for (const Transition& f :
                     forward_transitions_with_key(b.target, b.label.key)) {
                    if (f.label.action == b.label.action && equal(f.target, s)) redone = true;
                }
                CHECK(redone);
            }
        }
    }
}

TEST_CASE("forward bundles share the smallest fresh key") {
    testgen::Rng rng(555);
    for (int i = 0; i < 30; ++i) {
        TermPtr t = testgen::random_standard_term(rng);
        Lts l = explore(t, BackwardRatePolicy::equal(), 500);
        for (const TermPtr& s : l.states) {
            Key fresh = fresh_key(s);
            for (const Transition& f : forward_transitions(s)) CHECK(f.label.key == fresh);
        }
    }
}

TEST_CASE("each step changes the key count by exactly one") {
    testgen::Rng rng(31337);
    auto policy = BackwardRatePolicy::equal();
    for (int i = 0; i < 30; ++i) {
        TermPtr t = testgen::random_standard_term(rng);
        Lts l = explore(t, policy, 500);
        for (const TermPtr& s : l.states) {
            std::size_t n = keys_of(s).size();
            for (const Transition& tr : all_transitions(s, policy)) {
                std::size_t m = keys_of(tr.target).size();
                if (tr.label.dir == Direction::Forward) {
                    CHECK(m == n + 1);
                    CHECK(keys_of(tr.target).count(tr.label.key) == 1);
                } else {
                    CHECK(m + 1 == n);
                    CHECK(keys_of(tr.target).count(tr.label.key) == 0);
                }
                CHECK(is_well_formed(tr.target));
            }
        }
    }
}

TEST_CASE("every reachable state undoes back to the start in at most |keys| steps") {
    testgen::Rng rng(608);
    auto policy = BackwardRatePolicy::equal();
    for (int i = 0; i < 25; ++i) {
        TermPtr start = testgen::random_standard_term(rng);
        TermPtr origin = canonicalize_keys(start);
        Lts l = explore(start, policy, 500);
        for (const TermPtr& s : l.states) {
            std::size_t bound = keys_of(s).size();
            TermPtr cur = s;
            std::size_t steps = 0;
            while (!keys_of(cur).empty()) {
                auto back = backward_transitions(cur, policy);
                REQUIRE(!back.empty());  // keyed states always have a past
                cur = back.front().target;
                ++steps;
                REQUIRE(steps <= bound);
            }
            CHECK(steps == bound);  // one undo per key
            CHECK(equal(canonicalize_keys(cur), origin));
        }
    }
}

TEST_CASE("shape of the term is preserved along transitions") {
    // Static operators stay in place: erasing all keys from any reachable
    // state gives back the start term.
    testgen::Rng rng(112233);
    for (int i = 0; i < 25; ++i) {
        TermPtr start = testgen::random_standard_term(rng);
        Lts l = explore(start, BackwardRatePolicy::equal(), 500);
        for (const TermPtr& s : l.states) {
            TermPtr stripped = s;
            // strip keys via with_key_at on every keyed prefix path
            std::vector<std::pair<const Term*, AstPath>> walk{{s.get(), {}}};
            while (!walk.empty()) {
                auto [n, path] = walk.back();
                walk.pop_back();
                if (n->kind == TermKind::Prefix) {
                    if (n->key) stripped = with_key_at(stripped, path, std::nullopt);
                    AstPath p = path;
                    p.push_back(0);
                    walk.push_back({n->cont.get(), p});
                } else if (n->kind != TermKind::Nil) {
                    AstPath pl = path, pr = path;
                    pl.push_back(0);
                    pr.push_back(1);
                    walk.push_back({n->left.get(), pl});
                    walk.push_back({n->right.get(), pr});
                }
            }
            CHECK(equal(stripped, start));
        }
    }
}
