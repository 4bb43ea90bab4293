#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rmpc {

using Key = std::uint32_t;  // communication keys are positive integers
using KeySet = std::set<Key>;

// Path from the root of a term to a subterm. Each step is 0 (into a prefix
// continuation, or the left operand) or 1 (the right operand). Paths stay
// valid across transitions because the rules never restructure the tree; they
// only add or remove key decorations.
using AstPath = std::vector<std::uint8_t>;

enum class TermKind { Nil, Prefix, Choice, Parallel };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable process term. Executed prefixes carry a key; choice and parallel
// are static operators, so a term is both a process and its execution history.
struct Term {
    TermKind kind = TermKind::Nil;

    // Prefix fields
    std::string action;
    double rate = 0.0;
    std::optional<Key> key;
    TermPtr cont;

    // Choice / Parallel fields
    TermPtr left;
    TermPtr right;
    std::vector<std::string> sync;  // sorted, unique; empty means pure interleaving
};

TermPtr nil();
TermPtr prefix(std::string action, double rate, std::optional<Key> key, TermPtr cont);
TermPtr choice(TermPtr left, TermPtr right);
TermPtr parallel(TermPtr left, TermPtr right, std::vector<std::string> sync);

bool equal(const Term& a, const Term& b);
inline bool equal(const TermPtr& a, const TermPtr& b) { return equal(*a, *b); }

// Renders a term so that parse(format_term(t)) reproduces t exactly.
std::string format_term(const Term& t);
inline std::string format_term(const TermPtr& t) { return format_term(*t); }

// True iff the term carries no keys at all.
bool is_standard(const Term& t);
inline bool is_standard(const TermPtr& t) { return is_standard(*t); }

// All keys occurring in the term (synchronized occurrences count once).
KeySet keys_of(const Term& t);
inline KeySet keys_of(const TermPtr& t) { return keys_of(*t); }

// Smallest positive integer not used as a key in t.
Key fresh_key(const Term& t);
inline Key fresh_key(const TermPtr& t) { return fresh_key(*t); }

struct Diagnostic {
    std::string message;
    AstPath where;
};

// Structural validity: positive rates, no duplicate keys outside matching
// synchronization positions, at most one committed side per choice, and no
// key below an unkeyed prefix. Empty result means well formed.
std::vector<Diagnostic> check_well_formed(const Term& t);
inline std::vector<Diagnostic> check_well_formed(const TermPtr& t) { return check_well_formed(*t); }

inline bool is_well_formed(const Term& t) { return check_well_formed(t).empty(); }
inline bool is_well_formed(const TermPtr& t) { return check_well_formed(*t).empty(); }

// Renames keys bijectively to 1..m in order of first occurrence during a
// leftmost depth-first walk. Two terms are key-equivalent iff their canonical
// forms are equal. Idempotent; requires a well-formed input.
TermPtr canonicalize_keys(const TermPtr& t);

// Key-equivalence: identical up to a consistent bijective renaming of keys.
bool key_equivalent(const TermPtr& a, const TermPtr& b);

// Subterm at a path (throws std::out_of_range on a bad path).
const Term& node_at(const Term& t, const AstPath& path);

// Returns a copy of t with the key at the prefix addressed by `path` replaced
// (or cleared when `key` is empty). Shares all untouched branches.
TermPtr with_key_at(const TermPtr& t, const AstPath& path, std::optional<Key> key);

}  // namespace rmpc
