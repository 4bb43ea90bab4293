#include "core/causality.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "core/errors.hpp"

namespace rmpc {

namespace {

void causal(const Term& t, Key k, KeySet& out) {
    switch (t.kind) {
        case TermKind::Nil:
            return;
        case TermKind::Prefix: {
            if (!t.key) return;  // nothing executed below an unkeyed prefix
            if (*t.key == k) return;
            if (!keys_of(*t.cont).count(k)) return;
            out.insert(*t.key);
            causal(*t.cont, k, out);
            return;
        }
        case TermKind::Choice:
        case TermKind::Parallel:
            causal(*t.left, k, out);
            causal(*t.right, k, out);
            return;
    }
}

}  // namespace

KeySet causal_set(const TermPtr& t, Key k) {
    KeySet out;
    causal(*t, k, out);
    return out;
}

namespace {

void require_coinitial_distinct(const Transition& t1, const Transition& t2) {
    if (!equal(t1.source, t2.source))
        throw std::invalid_argument("transitions are not coinitial");
    if (same_transition(t1, t2))
        throw std::invalid_argument("transitions must be distinct");
}

// True when some pair of fired prefixes sits in the two branches of one
// choice occurrence.
bool split_at_choice(const Term& source, const std::vector<AstPath>& prov1,
                     const std::vector<AstPath>& prov2) {
    for (const AstPath& p1 : prov1) {
        for (const AstPath& p2 : prov2) {
            std::size_t n = std::min(p1.size(), p2.size());
            std::size_t k = 0;
            while (k < n && p1[k] == p2[k]) ++k;
            if (k == n) continue;  // one path extends the other
            AstPath common(p1.begin(), p1.begin() + k);
            if (node_at(source, common).kind == TermKind::Choice) return true;
        }
    }
    return false;
}

}  // namespace

bool conflicting(const Transition& t1, const Transition& t2) {
    require_coinitial_distinct(t1, t2);
    const Transition* fw = nullptr;
    const Transition* bk = nullptr;
    if (t1.label.dir == Direction::Forward && t2.label.dir == Direction::Backward) {
        fw = &t1;
        bk = &t2;
    } else if (t2.label.dir == Direction::Forward && t1.label.dir == Direction::Backward) {
        fw = &t2;
        bk = &t1;
    }
    if (fw) {
        // undoing one of the new step's causes is a conflict
        return causal_set(fw->target, fw->label.key).count(bk->label.key) > 0;
    }
    if (t1.label.dir == Direction::Forward && t2.label.dir == Direction::Forward)
        return split_at_choice(*t1.source, t1.provenance, t2.provenance);
    return false;  // two backward transitions never conflict
}

bool concurrent(const Transition& t1, const Transition& t2) { return !conflicting(t1, t2); }

namespace {

// The same step re-derived from another coinitial-adjacent source: matched by
// direction, action and fired prefixes. A backward step keeps its key; a
// forward step keeps it when still fresh, otherwise the smallest fresh key of
// the new source stands in (the canonical join absorbs the difference).
std::optional<Transition> residual_step(const Transition& step, const TermPtr& from,
                                        const BackwardRatePolicy& policy) {
    std::vector<Transition> candidates;
    if (step.label.dir == Direction::Forward) {
        Key k = keys_of(from).count(step.label.key) ? fresh_key(from) : step.label.key;
        candidates = forward_transitions_with_key(from, k);
    } else {
        candidates = backward_transitions(from, policy);
    }
    for (Transition& c : candidates) {
        if (c.label.action != step.label.action) continue;
        if (c.provenance != step.provenance) continue;
        if (step.label.dir == Direction::Backward && c.label.key != step.label.key) continue;
        return std::move(c);
    }
    return std::nullopt;
}

}  // namespace

Diamond complete_diamond(const Transition& t1, const Transition& t2,
                         const BackwardRatePolicy& policy) {
    if (conflicting(t1, t2))
        throw std::invalid_argument("cannot complete a square over conflicting transitions");
    std::optional<Transition> r2 = residual_step(t2, t1.target, policy);
    std::optional<Transition> r1 = residual_step(t1, t2.target, policy);
    if (!r2 || !r1)
        throw AuditError("missing residual: concurrent transitions failed to commute");
    TermPtr join1 = canonicalize_keys(r2->target);
    TermPtr join2 = canonicalize_keys(r1->target);
    if (!equal(join1, join2))
        throw AuditError("residual targets disagree: concurrent transitions failed to commute");
    return {std::move(*r2), std::move(*r1), std::move(join1)};
}

bool Computation::valid() const {
    if (!start) return false;
    const TermPtr* at = &start;
    for (const Transition& step : steps) {
        if (!equal(*at, step.source)) return false;
        bool found = false;
        if (step.label.dir == Direction::Forward) {
            if (keys_of(*at).count(step.label.key)) return false;
            for (const Transition& c : forward_transitions_with_key(*at, step.label.key)) {
                if (c.label == step.label && c.provenance == step.provenance &&
                    equal(c.target, step.target)) {
                    found = true;
                    break;
                }
            }
        } else {
            // backward rates depend on the policy in force, so the rate is
            // not re-checked here, only the step's shape
            for (const Transition& c : backward_transitions(*at, BackwardRatePolicy::equal())) {
                if (c.label.action == step.label.action && c.label.key == step.label.key &&
                    c.provenance == step.provenance && equal(c.target, step.target)) {
                    found = true;
                    break;
                }
            }
            if (found && !(step.label.rate > 0.0)) return false;
        }
        if (!found) return false;
        at = &step.target;
    }
    return true;
}

namespace {

bool inverse_pair(const Transition& a, const Transition& b) {
    return a.label.dir != b.label.dir && a.label.action == b.label.action &&
           a.label.key == b.label.key && equal(b.target, a.source);
}

// Turns [forward θ1, backward θ2] into [backward θ2', forward θ1'] over the
// same endpoints. The two backward steps undo the same prefix, so θ2's rate
// carries over; the forward residual re-fires θ1's prefix with its own key.
std::pair<Transition, Transition> commute_fw_bk(const Transition& th1, const Transition& th2) {
    const TermPtr& x = th1.source;
    std::optional<Transition> early_undo;
    for (Transition& c : backward_transitions(x, BackwardRatePolicy::equal())) {
        if (c.label.key == th2.label.key && c.label.action == th2.label.action &&
            c.provenance == th2.provenance) {
            early_undo = std::move(c);
            break;
        }
    }
    if (!early_undo)
        throw AuditError("backward step does not commute past the preceding forward step");
    early_undo->label.rate = th2.label.rate;
    std::optional<Transition> redo;
    for (Transition& c : forward_transitions_with_key(early_undo->target, th1.label.key)) {
        if (c.label.action == th1.label.action && c.provenance == th1.provenance) {
            redo = std::move(c);
            break;
        }
    }
    if (!redo || !equal(redo->target, th2.target))
        throw AuditError("forward step does not re-fire after commuting");
    return {std::move(*early_undo), std::move(*redo)};
}

}  // namespace

Computation normalize_parabolic(const Computation& w) {
    if (!w.valid()) throw std::invalid_argument("computation is not valid");
    Computation out = w;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < out.steps.size(); ++i) {
            Transition& a = out.steps[i];
            Transition& b = out.steps[i + 1];
            if (inverse_pair(a, b)) {
                out.steps.erase(out.steps.begin() + i, out.steps.begin() + i + 2);
                changed = true;
                break;
            }
            if (a.label.dir == Direction::Forward && b.label.dir == Direction::Backward) {
                // not an inverse pair, hence independent steps: commute them
                auto [undo, redo] = commute_fw_bk(a, b);
                a = std::move(undo);
                b = std::move(redo);
                changed = true;
                break;
            }
        }
    }
    return out;
}

bool causally_equivalent(const Computation& w1, const Computation& w2) {
    if (!w1.valid() || !w2.valid())
        throw std::invalid_argument("causal equivalence requires valid computations");
    return key_equivalent(w1.start, w2.start) && key_equivalent(w1.end(), w2.end());
}

namespace {

// Key-free skeleton of one step: what fired and in which direction, with the
// label's action and rate. Keys are reassigned deterministically on replay,
// which compares computations up to the choice of fresh keys.
struct StepContent {
    Direction dir;
    std::string action;
    double rate;
    std::vector<AstPath> prov;
};

struct ContentForm {
    TermPtr start;  // canonical
    std::vector<StepContent> steps;
};

std::string serialize(const ContentForm& w) {
    std::string out = format_term(w.start);
    for (const StepContent& s : w.steps) {
        out += s.dir == Direction::Forward ? ";+" : ";-";
        out += s.action;
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), s.rate);
        out += '@';
        out.append(buf, res.ptr);
        for (const AstPath& p : s.prov) {
            out += '/';
            for (std::uint8_t step : p) out += char('0' + step);
        }
    }
    return out;
}

ContentForm content_of(const Computation& w) {
    ContentForm out;
    out.start = canonicalize_keys(w.start);
    for (const Transition& t : w.steps)
        out.steps.push_back({t.label.dir, t.label.action, t.label.rate, t.provenance});
    return out;
}

// Replays a content form from its start, assigning the smallest fresh key to
// every forward step. Returns the concrete computation, or nothing if some
// step is not derivable.
std::optional<Computation> materialize(const ContentForm& w) {
    Computation out;
    out.start = w.start;
    TermPtr at = w.start;
    for (const StepContent& s : w.steps) {
        std::optional<Transition> match;
        std::vector<Transition> candidates;
        if (s.dir == Direction::Forward)
            candidates = forward_transitions_with_key(at, fresh_key(at));
        else
            candidates = backward_transitions(at, BackwardRatePolicy::equal());
        for (Transition& c : candidates) {
            if (c.label.action == s.action && c.provenance == s.prov) {
                match = std::move(c);
                break;
            }
        }
        if (!match) return std::nullopt;
        match->label.rate = s.rate;  // rates travel with the content
        at = match->target;
        out.steps.push_back(std::move(*match));
    }
    return out;
}

std::vector<ContentForm> rewrite_neighbours(const ContentForm& w) {
    std::vector<ContentForm> out;
    std::optional<Computation> concrete = materialize(w);
    if (!concrete) return out;
    for (std::size_t i = 0; i + 1 < w.steps.size(); ++i) {
        const Transition& a = concrete->steps[i];
        const Transition& b = concrete->steps[i + 1];
        // cancellation of a do/undo or undo/redo pair of the same prefix
        if (a.label.dir != b.label.dir && a.label.action == b.label.action &&
            a.provenance == b.provenance &&
            key_equivalent(b.target, a.source)) {
            ContentForm shorter = w;
            shorter.steps.erase(shorter.steps.begin() + i, shorter.steps.begin() + i + 2);
            out.push_back(std::move(shorter));
            continue;
        }
        // commutation of two adjacent independent steps
        std::optional<Transition> early;
        std::vector<Transition> candidates;
        if (b.label.dir == Direction::Forward) {
            Key k = keys_of(a.source).count(b.label.key) ? 0 : b.label.key;
            if (k == 0) continue;  // the key is busy before a: cannot commute
            candidates = forward_transitions_with_key(a.source, k);
        } else {
            candidates = backward_transitions(a.source, BackwardRatePolicy::equal());
        }
        for (Transition& c : candidates) {
            if (c.label.action == b.label.action && c.provenance == b.provenance &&
                (b.label.dir == Direction::Forward || c.label.key == b.label.key)) {
                early = std::move(c);
                break;
            }
        }
        if (!early) continue;
        if (same_transition(a, *early)) continue;
        if (conflicting(a, *early)) continue;
        std::optional<Transition> late;
        if (a.label.dir == Direction::Forward) {
            if (keys_of(early->target).count(a.label.key)) continue;
            candidates = forward_transitions_with_key(early->target, a.label.key);
        } else {
            candidates = backward_transitions(early->target, BackwardRatePolicy::equal());
        }
        for (Transition& c : candidates) {
            if (c.label.action == a.label.action && c.provenance == a.provenance &&
                (a.label.dir == Direction::Forward || c.label.key == a.label.key)) {
                late = std::move(c);
                break;
            }
        }
        if (!late) continue;
        if (!key_equivalent(late->target, b.target)) continue;
        ContentForm swapped = w;
        std::swap(swapped.steps[i], swapped.steps[i + 1]);
        out.push_back(std::move(swapped));
    }
    return out;
}

}  // namespace

AuditVerdict audit_causally_equivalent(const Computation& w1, const Computation& w2,
                                       std::size_t budget) {
    if (!w1.valid() || !w2.valid())
        throw std::invalid_argument("causal equivalence requires valid computations");

    // breadth-first closure under commutation and cancellation, grown from
    // both computations; they are equivalent exactly when the closures meet
    std::map<std::string, int> seen;  // serialized form -> owner bitmask
    std::deque<std::pair<ContentForm, int>> frontier;
    std::size_t visited = 0;

    auto add = [&](ContentForm&& w, int owner) -> bool {
        std::string key = serialize(w);
        auto [it, fresh] = seen.emplace(std::move(key), owner);
        if (!fresh) {
            if ((it->second | owner) != it->second) return true;  // met the other side
            return false;
        }
        frontier.emplace_back(std::move(w), owner);
        return false;
    };

    ContentForm c1 = content_of(w1);
    ContentForm c2 = content_of(w2);
    if (add(std::move(c1), 1)) return AuditVerdict::Equivalent;
    if (add(std::move(c2), 2)) return AuditVerdict::Equivalent;

    while (!frontier.empty()) {
        if (++visited > budget) return AuditVerdict::BudgetExhausted;
        auto [form, owner] = std::move(frontier.front());
        frontier.pop_front();
        for (ContentForm& next : rewrite_neighbours(form))
            if (add(std::move(next), owner)) return AuditVerdict::Equivalent;
    }
    return AuditVerdict::NotEquivalent;
}

}  // namespace rmpc
