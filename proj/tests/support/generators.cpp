#include "support/generators.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "core/lts.hpp"
#include "core/semantics.hpp"

namespace rmpc::testgen {

namespace {

const char* kActions[] = {"a", "b", "c", "d"};
// Dyadic rates: splits and sums recombine exactly in floating point.
const double kRates[] = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};

std::string pick_action(Rng& rng) { return kActions[rng() % 4]; }
double pick_rate(Rng& rng) { return kRates[rng() % 6]; }

struct Budget {
    int prefixes;
    int parallels;
};

int count_prefixes(const Term& t) {
    switch (t.kind) {
        case TermKind::Nil:
            return 0;
        case TermKind::Prefix:
            return 1 + count_prefixes(*t.cont);
        default:
            return count_prefixes(*t.left) + count_prefixes(*t.right);
    }
}

TermPtr gen(Rng& rng, Budget& b, int depth) {
    if (b.prefixes <= 0 || depth > 8) return nil();
    int roll = static_cast<int>(rng() % 100);
    if (roll < 20) return nil();
    if (roll < 70 || b.prefixes < 2) {
        --b.prefixes;
        return prefix(pick_action(rng), pick_rate(rng), std::nullopt,
                            gen(rng, b, depth + 1));
    }
    if (roll < 85 && b.parallels > 0) {
        --b.parallels;
        std::vector<std::string> sync;
        if (rng() % 2)
            for (const char* a : kActions)
                if (rng() % 100 < 25) sync.push_back(a);
        TermPtr l = gen(rng, b, depth + 1);
        TermPtr r = gen(rng, b, depth + 1);
        return parallel(std::move(l), std::move(r), std::move(sync));
    }
    TermPtr l = gen(rng, b, depth + 1);
    TermPtr r = gen(rng, b, depth + 1);
    return choice(std::move(l), std::move(r));
}

TermPtr gen_retrying(Rng& rng, int max_prefixes, int max_parallels, std::size_t max_states) {
    for (;;) {
        Budget b{max_prefixes, max_parallels};
        TermPtr t = gen(rng, b, 0);
        if (count_prefixes(*t) == 0) continue;
        Lts l = explore(t, BackwardRatePolicy::equal(), max_states);
        if (l.truncated) continue;
        return t;
    }
}

}  // namespace

TermPtr random_standard_term(Rng& rng, int max_prefixes, int max_parallels,
                             std::size_t max_states) {
    return gen_retrying(rng, max_prefixes, max_parallels, max_states);
}

TermPtr random_sequential_term(Rng& rng, int max_prefixes) {
    return gen_retrying(rng, max_prefixes, 0, 500);
}

TermPtr random_outer_parallel_term(Rng& rng) {
    auto comp = [&] { return random_sequential_term(rng, 3); };
    auto sync_set = [&] {
        std::vector<std::string> sync;
        if (rng() % 2)
            for (const char* a : kActions)
                if (rng() % 100 < 25) sync.push_back(a);
        return sync;
    };
    TermPtr t = parallel(comp(), comp(), sync_set());
    if (rng() % 2) t = parallel(std::move(t), comp(), sync_set());
    return t;
}

BackwardRatePolicy random_multiplier_policy(Rng& rng) {
    std::uniform_real_distribution<double> mult(0.1, 10.0);
    std::map<std::string, double> table;
    for (const char* a : kActions) table[a] = mult(rng);
    return BackwardRatePolicy::multipliers(std::move(table), mult(rng));
}

RatedLts random_layered_lts(Rng& rng) {
    RatedLts l;
    l.num_states = 2 + rng() % 7;  // 2..8
    l.initial = 0;
    std::size_t layers = std::min<std::size_t>(1 + rng() % 4, l.num_states - 1) + 1;  // 2..5
    // State 0 alone in layer 0; the rest spread over layers 1..layers-1 with
    // every layer nonempty (fill round-robin, then shuffle the tail).
    std::vector<std::size_t> layer_of(l.num_states, 0);
    for (std::size_t s = 1; s < l.num_states; ++s)
        layer_of[s] = (s - 1) < (layers - 1) ? s : 1 + rng() % (layers - 1);
    std::sort(layer_of.begin() + 1, layer_of.end());
    // One guaranteed incoming move per non-initial state, then extras.
    auto states_in = [&](std::size_t k) {
        std::vector<std::size_t> v;
        for (std::size_t s = 0; s < l.num_states; ++s)
            if (layer_of[s] == k) v.push_back(s);
        return v;
    };
    const char* acts[] = {"a", "b"};
    for (std::size_t s = 1; s < l.num_states; ++s) {
        std::vector<std::size_t> prev = states_in(layer_of[s] - 1);
        std::size_t from = prev[rng() % prev.size()];
        l.moves.push_back({from, acts[rng() % 2], pick_rate(rng), s});
    }
    std::size_t extras = rng() % (l.num_states + 1);
    for (std::size_t e = 0; e < extras; ++e) {
        std::size_t to = 1 + rng() % (l.num_states - 1);
        std::vector<std::size_t> prev = states_in(layer_of[to] - 1);
        if (prev.empty()) continue;
        std::size_t from = prev[rng() % prev.size()];
        l.moves.push_back({from, acts[rng() % 2], pick_rate(rng), to});
    }
    return l;
}

RatedLts equivalent_mutation(Rng& rng, const RatedLts& l) {
    RatedLts out = l;
    if (out.moves.empty()) return out;
    if (rng() % 2) {
        // Split one move's rate into two parallel moves.
        std::size_t i = rng() % out.moves.size();
        double frac = (rng() % 2) ? 0.5 : 0.25;
        RatedMove extra = out.moves[i];
        extra.rate = out.moves[i].rate * frac;
        out.moves[i].rate -= extra.rate;
        out.moves.push_back(extra);
    } else {
        // Clone a non-initial state: same outgoing moves, incoming moves
        // split between the original and the clone.
        std::size_t s = 1 + rng() % (out.num_states - 1);
        std::size_t clone = out.num_states++;
        std::size_t n = out.moves.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (out.moves[i].from == s) {
                RatedMove m = out.moves[i];
                m.from = clone;
                out.moves.push_back(m);
            }
        }
        for (auto& m : out.moves)
            if (m.to == s && rng() % 2) m.to = clone;
    }
    return out;
}

RatedLts perturbed_mutation(Rng& rng, const RatedLts& l) {
    RatedLts out = l;
    if (out.moves.empty()) return out;
    std::size_t i = rng() % out.moves.size();
    if (rng() % 2)
        out.moves[i].rate *= 1.375;
    else
        out.moves[i].action = out.moves[i].action == "a" ? "b" : "a";
    return out;
}

Computation random_computation(Rng& rng, const TermPtr& start, const BackwardRatePolicy& policy,
                               int max_len) {
    Computation w;
    w.start = start;
    TermPtr cur = start;
    int len = static_cast<int>(rng() % (max_len + 1));
    for (int i = 0; i < len; ++i) {
        std::vector<Transition> ts = all_transitions(cur, policy);
        if (ts.empty()) break;
        Transition t = ts[rng() % ts.size()];
        w.steps.push_back(t);
        cur = t.target;
    }
    return w;
}

}  // namespace rmpc::testgen
