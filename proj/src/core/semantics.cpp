#include "core/semantics.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "core/errors.hpp"

namespace rmpc {

bool same_transition(const Transition& a, const Transition& b) {
    return a.label == b.label && a.provenance == b.provenance && equal(a.source, b.source) &&
           equal(a.target, b.target);
}

std::string format_label(const TransitionLabel& l) {
    char rate[64];
    auto res = std::to_chars(rate, rate + sizeof(rate), l.rate);
    std::string out = l.dir == Direction::Forward ? "" : "~";
    out += "<" + l.action + "," + std::string(rate, res.ptr) + ">[" + std::to_string(l.key) + "]";
    return out;
}

namespace {

void prepend_step(std::vector<AstPath>& paths, std::uint8_t step) {
    for (AstPath& p : paths) p.insert(p.begin(), step);
}

void sort_provenance(std::vector<AstPath>& paths) { std::sort(paths.begin(), paths.end()); }

void require_well_formed(const TermPtr& t) {
    auto diags = check_well_formed(t);
    if (!diags.empty()) throw IllFormedError("ill-formed term: " + diags.front().message);
}

// Forward derivation. Every step in the result fires with key `k`, assumed
// unused anywhere in the full term, so the side conditions "the key is fresh"
// and "both synchronization partners use the same key" hold by construction.
std::vector<Transition> fwd(const TermPtr& t, Key k) {
    std::vector<Transition> out;
    switch (t->kind) {
        case TermKind::Nil:
            break;
        case TermKind::Prefix: {
            if (!t->key) {
                if (is_standard(t->cont))
                    out.push_back({t,
                                   {Direction::Forward, t->action, t->rate, k},
                                   prefix(t->action, t->rate, k, t->cont),
                                   {AstPath{}}});
            } else {
                // executed prefix: execution continues underneath
                for (Transition& sub : fwd(t->cont, k)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 0);
                    out.push_back({t, sub.label, prefix(t->action, t->rate, t->key, sub.target),
                                   std::move(prov)});
                }
            }
            break;
        }
        case TermKind::Choice: {
            if (is_standard(t->right))
                for (Transition& sub : fwd(t->left, k)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 0);
                    out.push_back({t, sub.label, choice(sub.target, t->right), std::move(prov)});
                }
            if (is_standard(t->left))
                for (Transition& sub : fwd(t->right, k)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 1);
                    out.push_back({t, sub.label, choice(t->left, sub.target), std::move(prov)});
                }
            break;
        }
        case TermKind::Parallel: {
            std::vector<Transition> ls = fwd(t->left, k);
            std::vector<Transition> rs = fwd(t->right, k);
            auto synced = [&](const std::string& a) {
                return std::binary_search(t->sync.begin(), t->sync.end(), a);
            };
            for (Transition& sub : ls) {
                if (synced(sub.label.action)) continue;
                std::vector<AstPath> prov = sub.provenance;
                prepend_step(prov, 0);
                out.push_back(
                    {t, sub.label, parallel(sub.target, t->right, t->sync), std::move(prov)});
            }
            for (Transition& sub : rs) {
                if (synced(sub.label.action)) continue;
                std::vector<AstPath> prov = sub.provenance;
                prepend_step(prov, 1);
                out.push_back(
                    {t, sub.label, parallel(t->left, sub.target, t->sync), std::move(prov)});
            }
            for (const Transition& l : ls) {
                if (!synced(l.label.action)) continue;
                for (const Transition& r : rs) {
                    if (r.label.action != l.label.action) continue;
                    std::vector<AstPath> prov = l.provenance;
                    prepend_step(prov, 0);
                    std::vector<AstPath> rprov = r.provenance;
                    prepend_step(rprov, 1);
                    prov.insert(prov.end(), rprov.begin(), rprov.end());
                    sort_provenance(prov);
                    out.push_back(
                        {t,
                         {Direction::Forward, l.label.action, l.label.rate * r.label.rate, k},
                         parallel(l.target, r.target, t->sync),
                         std::move(prov)});
                }
            }
            break;
        }
    }
    return out;
}

std::vector<Transition> bwd(const TermPtr& t, const BackwardRatePolicy& policy) {
    std::vector<Transition> out;
    switch (t->kind) {
        case TermKind::Nil:
            break;
        case TermKind::Prefix: {
            if (!t->key) break;
            if (is_standard(t->cont)) {
                // the most recent step of this component: undo it
                out.push_back({t,
                               {Direction::Backward, t->action, policy(t->action, t->rate), *t->key},
                               prefix(t->action, t->rate, std::nullopt, t->cont),
                               {AstPath{}}});
            } else {
                // younger steps live underneath; undo those first
                for (Transition& sub : bwd(t->cont, policy)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 0);
                    out.push_back({t, sub.label, prefix(t->action, t->rate, t->key, sub.target),
                                   std::move(prov)});
                }
            }
            break;
        }
        case TermKind::Choice: {
            if (is_standard(t->right))
                for (Transition& sub : bwd(t->left, policy)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 0);
                    out.push_back({t, sub.label, choice(sub.target, t->right), std::move(prov)});
                }
            if (is_standard(t->left))
                for (Transition& sub : bwd(t->right, policy)) {
                    std::vector<AstPath> prov = std::move(sub.provenance);
                    prepend_step(prov, 1);
                    out.push_back({t, sub.label, choice(t->left, sub.target), std::move(prov)});
                }
            break;
        }
        case TermKind::Parallel: {
            std::vector<Transition> ls = bwd(t->left, policy);
            std::vector<Transition> rs = bwd(t->right, policy);
            auto synced = [&](const std::string& a) {
                return std::binary_search(t->sync.begin(), t->sync.end(), a);
            };
            KeySet lkeys = keys_of(t->left);
            KeySet rkeys = keys_of(t->right);
            for (Transition& sub : ls) {
                if (synced(sub.label.action) || rkeys.count(sub.label.key)) continue;
                std::vector<AstPath> prov = sub.provenance;
                prepend_step(prov, 0);
                out.push_back(
                    {t, sub.label, parallel(sub.target, t->right, t->sync), std::move(prov)});
            }
            for (Transition& sub : rs) {
                if (synced(sub.label.action) || lkeys.count(sub.label.key)) continue;
                std::vector<AstPath> prov = sub.provenance;
                prepend_step(prov, 1);
                out.push_back(
                    {t, sub.label, parallel(t->left, sub.target, t->sync), std::move(prov)});
            }
            for (const Transition& l : ls) {
                if (!synced(l.label.action)) continue;
                for (const Transition& r : rs) {
                    if (r.label.action != l.label.action || r.label.key != l.label.key) continue;
                    std::vector<AstPath> prov = l.provenance;
                    prepend_step(prov, 0);
                    std::vector<AstPath> rprov = r.provenance;
                    prepend_step(rprov, 1);
                    prov.insert(prov.end(), rprov.begin(), rprov.end());
                    sort_provenance(prov);
                    out.push_back({t,
                                   {Direction::Backward, l.label.action,
                                    l.label.rate * r.label.rate, l.label.key},
                                   parallel(l.target, r.target, t->sync),
                                   std::move(prov)});
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace

std::vector<Transition> forward_transitions(const TermPtr& t) {
    require_well_formed(t);
    return fwd(t, fresh_key(t));
}

std::vector<Transition> forward_transitions_with_key(const TermPtr& t, Key key) {
    require_well_formed(t);
    if (key == 0) throw std::invalid_argument("keys are positive integers");
    if (keys_of(t).count(key))
        throw std::invalid_argument("key " + std::to_string(key) + " already occurs in the term");
    return fwd(t, key);
}

std::vector<Transition> backward_transitions(const TermPtr& t, const BackwardRatePolicy& policy) {
    require_well_formed(t);
    return bwd(t, policy);
}

std::vector<Transition> all_transitions(const TermPtr& t, const BackwardRatePolicy& policy) {
    std::vector<Transition> out = forward_transitions(t);
    std::vector<Transition> back = backward_transitions(t, policy);
    out.insert(out.end(), std::make_move_iterator(back.begin()),
               std::make_move_iterator(back.end()));
    return out;
}

}  // namespace rmpc
