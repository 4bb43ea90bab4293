#pragma once

#include <cstddef>
#include <map>

#include "core/bisim.hpp"
#include "core/ctmc.hpp"
#include "core/term.hpp"

namespace rmpc::testoracle {

// Key equivalence decided the slow way: breadth-first closure of the two
// generating rename rules (single fresh-key rename away from synchronizing
// context; simultaneous rename of a shared synchronization key), over a
// bounded fresh-key pool. Independent of canonicalize_keys; only meant for
// terms with a handful of keys.
bool bfs_key_equivalent(const TermPtr& a, const TermPtr& b, std::size_t max_visited = 20000);

// Rewrites every key through the given mapping, keeping positions; with a
// bijection this manufactures key-equivalent variants of a term.
TermPtr remap_keys(const TermPtr& t, const std::map<Key, Key>& to);

// True when the forward moves of c form a tree rooted at the initial state:
// every other state has exactly one incoming forward move and is reachable.
bool forward_moves_form_tree(const Ctmc& c);

// Two hand-built one-action chains: two moves a@1 and a@2 into separate end
// states, versus one move a@3. Markovian-bisimilar, but told apart by
// incoming rates.
RatedLts make_split_chain();
RatedLts make_sum_chain();

}  // namespace rmpc::testoracle
