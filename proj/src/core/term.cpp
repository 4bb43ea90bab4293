#include "core/term.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>

#include "core/errors.hpp"

namespace rmpc {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

TermPtr nil() {
    static const TermPtr instance = std::make_shared<Term>();
    return instance;
}

TermPtr prefix(std::string action, double rate, std::optional<Key> key, TermPtr cont) {
    require(!action.empty(), "prefix action must be non-empty");
    require(rate > 0.0, "prefix rate must be positive");
    require(!key || *key > 0, "keys are positive integers");
    require(cont != nullptr, "prefix continuation must be non-null");
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Prefix;
    t->action = std::move(action);
    t->rate = rate;
    t->key = key;
    t->cont = std::move(cont);
    return t;
}

TermPtr choice(TermPtr left, TermPtr right) {
    require(left && right, "choice operands must be non-null");
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Choice;
    t->left = std::move(left);
    t->right = std::move(right);
    return t;
}

TermPtr parallel(TermPtr left, TermPtr right, std::vector<std::string> sync) {
    require(left && right, "parallel operands must be non-null");
    std::sort(sync.begin(), sync.end());
    sync.erase(std::unique(sync.begin(), sync.end()), sync.end());
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Parallel;
    t->left = std::move(left);
    t->right = std::move(right);
    t->sync = std::move(sync);
    return t;
}

bool equal(const Term& a, const Term& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case TermKind::Nil:
            return true;
        case TermKind::Prefix:
            return a.action == b.action && a.rate == b.rate && a.key == b.key &&
                   equal(*a.cont, *b.cont);
        case TermKind::Choice:
            return equal(*a.left, *b.left) && equal(*a.right, *b.right);
        case TermKind::Parallel:
            return a.sync == b.sync && equal(*a.left, *b.left) && equal(*a.right, *b.right);
    }
    return false;
}

namespace {

std::string format_rate(double r) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), r);
    return std::string(buf, res.ptr);
}

// Precedence levels, loosest first: parallel < choice < prefix.
enum Level { LvlParallel = 0, LvlChoice = 1, LvlPrefix = 2 };

void fmt(const Term& t, Level ctx, std::string& out) {
    switch (t.kind) {
        case TermKind::Nil:
            out += '0';
            return;
        case TermKind::Prefix:
            out += '<';
            out += t.action;
            out += ',';
            out += format_rate(t.rate);
            out += '>';
            if (t.key) {
                out += '[';
                out += std::to_string(*t.key);
                out += ']';
            }
            out += '.';
            fmt(*t.cont, LvlPrefix, out);
            return;
        case TermKind::Choice: {
            bool parens = ctx > LvlChoice;
            if (parens) out += '(';
            fmt(*t.left, LvlChoice, out);
            out += " + ";
            // right operand printed one level tighter so that left
            // associativity survives a round trip
            fmt(*t.right, LvlPrefix, out);
            if (parens) out += ')';
            return;
        }
        case TermKind::Parallel: {
            bool parens = ctx > LvlParallel;
            if (parens) out += '(';
            fmt(*t.left, LvlParallel, out);
            out += " |[";
            for (std::size_t i = 0; i < t.sync.size(); ++i) {
                if (i) out += ',';
                out += t.sync[i];
            }
            out += "]| ";
            fmt(*t.right, LvlChoice, out);
            if (parens) out += ')';
            return;
        }
    }
}

}  // namespace

std::string format_term(const Term& t) {
    std::string out;
    fmt(t, LvlParallel, out);
    return out;
}

bool is_standard(const Term& t) {
    switch (t.kind) {
        case TermKind::Nil:
            return true;
        case TermKind::Prefix:
            return !t.key && is_standard(*t.cont);
        case TermKind::Choice:
        case TermKind::Parallel:
            return is_standard(*t.left) && is_standard(*t.right);
    }
    return true;
}

namespace {

void collect_keys(const Term& t, KeySet& out) {
    switch (t.kind) {
        case TermKind::Nil:
            return;
        case TermKind::Prefix:
            if (t.key) out.insert(*t.key);
            collect_keys(*t.cont, out);
            return;
        case TermKind::Choice:
        case TermKind::Parallel:
            collect_keys(*t.left, out);
            collect_keys(*t.right, out);
            return;
    }
}

}  // namespace

KeySet keys_of(const Term& t) {
    KeySet out;
    collect_keys(t, out);
    return out;
}

Key fresh_key(const Term& t) {
    KeySet used = keys_of(t);
    Key k = 1;
    while (used.count(k)) ++k;
    return k;
}

namespace {

// Per-key usage map: each key maps to the set of actions it labels.
using KeyActions = std::map<Key, std::set<std::string>>;

void merge_choice(KeyActions& into, const KeyActions& from) {
    for (const auto& [k, acts] : from) into[k].insert(acts.begin(), acts.end());
}

void wf(const Term& t, AstPath& path, std::vector<Diagnostic>& diags, KeyActions& out) {
    switch (t.kind) {
        case TermKind::Nil:
            return;
        case TermKind::Prefix: {
            if (t.rate <= 0.0)
                diags.push_back({"rate must be positive", path});
            KeyActions inner;
            path.push_back(0);
            wf(*t.cont, path, diags, inner);
            path.pop_back();
            if (t.key) {
                if (inner.count(*t.key))
                    diags.push_back({"duplicate key " + std::to_string(*t.key), path});
                inner[*t.key].insert(t.action);
            } else if (!is_standard(*t.cont)) {
                diags.push_back({"keyed prefix below an unkeyed one", path});
            }
            out = std::move(inner);
            return;
        }
        case TermKind::Choice: {
            KeyActions l, r;
            path.push_back(0);
            wf(*t.left, path, diags, l);
            path.pop_back();
            path.push_back(1);
            wf(*t.right, path, diags, r);
            path.pop_back();
            if (!l.empty() && !r.empty())
                diags.push_back({"both branches of a choice are committed", path});
            out = std::move(l);
            merge_choice(out, r);
            return;
        }
        case TermKind::Parallel: {
            KeyActions l, r;
            path.push_back(0);
            wf(*t.left, path, diags, l);
            path.pop_back();
            path.push_back(1);
            wf(*t.right, path, diags, r);
            path.pop_back();
            for (const auto& [k, acts] : r) {
                auto it = l.find(k);
                if (it == l.end()) continue;
                // A key shared across a parallel must stem from one
                // synchronization: a single common action inside the sync set.
                const auto& lacts = it->second;
                bool ok = lacts.size() == 1 && acts.size() == 1 && *lacts.begin() == *acts.begin() &&
                          std::binary_search(t.sync.begin(), t.sync.end(), *lacts.begin());
                if (!ok)
                    diags.push_back({"duplicate key " + std::to_string(k) +
                                         " outside a matching synchronization",
                                     path});
            }
            out = std::move(l);
            merge_choice(out, r);
            return;
        }
    }
}

}  // namespace

std::vector<Diagnostic> check_well_formed(const Term& t) {
    std::vector<Diagnostic> diags;
    AstPath path;
    KeyActions usage;
    wf(t, path, diags, usage);
    return diags;
}

namespace {

void first_occurrences(const Term& t, std::map<Key, Key>& rename, Key& next) {
    switch (t.kind) {
        case TermKind::Nil:
            return;
        case TermKind::Prefix:
            if (t.key && !rename.count(*t.key)) rename[*t.key] = next++;
            first_occurrences(*t.cont, rename, next);
            return;
        case TermKind::Choice:
        case TermKind::Parallel:
            first_occurrences(*t.left, rename, next);
            first_occurrences(*t.right, rename, next);
            return;
    }
}

TermPtr apply_rename(const TermPtr& t, const std::map<Key, Key>& rename) {
    switch (t->kind) {
        case TermKind::Nil:
            return t;
        case TermKind::Prefix: {
            TermPtr cont = apply_rename(t->cont, rename);
            std::optional<Key> key = t->key;
            if (key) key = rename.at(*key);
            if (cont == t->cont && key == t->key) return t;
            return prefix(t->action, t->rate, key, cont);
        }
        case TermKind::Choice: {
            TermPtr l = apply_rename(t->left, rename);
            TermPtr r = apply_rename(t->right, rename);
            if (l == t->left && r == t->right) return t;
            return choice(l, r);
        }
        case TermKind::Parallel: {
            TermPtr l = apply_rename(t->left, rename);
            TermPtr r = apply_rename(t->right, rename);
            if (l == t->left && r == t->right) return t;
            return parallel(l, r, t->sync);
        }
    }
    return t;
}

}  // namespace

TermPtr canonicalize_keys(const TermPtr& t) {
    std::map<Key, Key> rename;
    Key next = 1;
    first_occurrences(*t, rename, next);
    bool identity = true;
    for (const auto& [from, to] : rename)
        if (from != to) identity = false;
    if (identity) return t;
    return apply_rename(t, rename);
}

bool key_equivalent(const TermPtr& a, const TermPtr& b) {
    return equal(canonicalize_keys(a), canonicalize_keys(b));
}

const Term& node_at(const Term& t, const AstPath& path) {
    const Term* cur = &t;
    for (std::uint8_t step : path) {
        switch (cur->kind) {
            case TermKind::Prefix:
                if (step != 0) throw std::out_of_range("bad step under prefix");
                cur = cur->cont.get();
                break;
            case TermKind::Choice:
            case TermKind::Parallel:
                cur = (step == 0 ? cur->left : cur->right).get();
                break;
            default:
                throw std::out_of_range("path leads below a leaf");
        }
    }
    return *cur;
}

namespace {

TermPtr rebuild(const TermPtr& t, const AstPath& path, std::size_t at, std::optional<Key> key) {
    if (at == path.size()) {
        if (t->kind != TermKind::Prefix) throw std::out_of_range("path does not address a prefix");
        return prefix(t->action, t->rate, key, t->cont);
    }
    std::uint8_t step = path[at];
    switch (t->kind) {
        case TermKind::Prefix:
            if (step != 0) throw std::out_of_range("bad step under prefix");
            return prefix(t->action, t->rate, t->key, rebuild(t->cont, path, at + 1, key));
        case TermKind::Choice:
            return step == 0 ? choice(rebuild(t->left, path, at + 1, key), t->right)
                             : choice(t->left, rebuild(t->right, path, at + 1, key));
        case TermKind::Parallel:
            return step == 0 ? parallel(rebuild(t->left, path, at + 1, key), t->right, t->sync)
                             : parallel(t->left, rebuild(t->right, path, at + 1, key), t->sync);
        default:
            throw std::out_of_range("path leads below a leaf");
    }
}

}  // namespace

TermPtr with_key_at(const TermPtr& t, const AstPath& path, std::optional<Key> key) {
    return rebuild(t, path, 0, key);
}

}  // namespace rmpc
