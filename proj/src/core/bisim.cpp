#include "core/bisim.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "core/errors.hpp"

namespace rmpc {

RatedLts RatedLts::from_ctmc(const Ctmc& c) {
    RatedLts l;
    l.num_states = c.size();
    l.initial = c.initial;
    l.state_names = c.state_names;
    for (const CtmcMove& m : c.moves)
        if (m.dir == Direction::Forward) l.moves.push_back({m.from, m.action, m.rate, m.to});
    return l;
}

double rate_to_class(const RatedLts& l, std::size_t s, const std::string& a,
                     const std::vector<bool>& into) {
    if (s >= l.num_states || into.size() != l.num_states)
        throw std::invalid_argument("state or class out of range");
    double sum = 0.0;
    for (const RatedMove& m : l.moves)
        if (m.from == s && m.action == a && into[m.to]) sum += m.rate;
    return sum;
}

namespace {

// signature entry: rates bucketed by (action, target block)
using Signature = std::vector<std::tuple<std::string, std::size_t, double>>;

Signature state_signature(const RatedLts& l, std::size_t s,
                          const std::vector<std::size_t>& block) {
    std::map<std::pair<std::string, std::size_t>, double> sums;
    for (const RatedMove& m : l.moves)
        if (m.from == s) sums[{m.action, block[m.to]}] += m.rate;
    Signature sig;
    sig.reserve(sums.size());
    for (const auto& [k, v] : sums) sig.emplace_back(k.first, k.second, v);
    return sig;
}

bool signature_equal(const Signature& a, const Signature& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::get<0>(a[i]) != std::get<0>(b[i]) || std::get<1>(a[i]) != std::get<1>(b[i]))
            return false;
        if (std::abs(std::get<2>(a[i]) - std::get<2>(b[i])) > tol) return false;
    }
    return true;
}

bool signature_less(const Signature& a, const Signature& b, double tol) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (std::get<0>(a[i]) != std::get<0>(b[i])) return std::get<0>(a[i]) < std::get<0>(b[i]);
        if (std::get<1>(a[i]) != std::get<1>(b[i])) return std::get<1>(a[i]) < std::get<1>(b[i]);
        double d = std::get<2>(a[i]) - std::get<2>(b[i]);
        if (std::abs(d) > tol) return d < 0.0;
    }
    return a.size() < b.size();
}

// One refinement pass over an arbitrary carrier: regroups the members of each
// block by signature. Returns true when something split.
template <typename SigOf>
bool refine_once(std::vector<std::size_t>& block, std::size_t& num_blocks, SigOf&& sig_of,
                 double tol) {
    std::size_t n = block.size();
    std::vector<Signature> sigs(n);
    for (std::size_t i = 0; i < n; ++i) sigs[i] = sig_of(i);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (block[x] != block[y]) return block[x] < block[y];
        if (!signature_equal(sigs[x], sigs[y], tol)) return signature_less(sigs[x], sigs[y], tol);
        return false;
    });

    std::vector<std::size_t> next(n);
    std::size_t id = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            std::size_t prev = order[k - 1], cur = order[k];
            if (block[prev] != block[cur] || !signature_equal(sigs[prev], sigs[cur], tol)) ++id;
        }
        next[order[k]] = id;
    }
    ++id;
    bool changed = id != num_blocks || next != block;
    block = std::move(next);
    num_blocks = id;
    return changed;
}

}  // namespace

std::vector<std::size_t> mb_partition(const RatedLts& l, double tol) {
    std::vector<std::size_t> block(l.num_states, 0);
    std::size_t num_blocks = l.num_states == 0 ? 0 : 1;
    bool changed = true;
    while (changed)
        changed = refine_once(
            block, num_blocks, [&](std::size_t s) { return state_signature(l, s, block); }, tol);
    return block;
}

namespace {

RatedLts disjoint_union(const RatedLts& a, const RatedLts& b) {
    RatedLts u;
    u.num_states = a.num_states + b.num_states;
    u.initial = a.initial;
    u.moves = a.moves;
    for (const RatedMove& m : b.moves)
        u.moves.push_back({m.from + a.num_states, m.action, m.rate, m.to + a.num_states});
    if (!a.state_names.empty() || !b.state_names.empty()) {
        u.state_names.resize(u.num_states);
        for (std::size_t i = 0; i < a.num_states; ++i)
            u.state_names[i] = a.state_names.empty() ? "a" + std::to_string(i) : a.state_names[i];
        for (std::size_t i = 0; i < b.num_states; ++i)
            u.state_names[a.num_states + i] =
                b.state_names.empty() ? "b" + std::to_string(i) : b.state_names[i];
    }
    return u;
}

}  // namespace

MbResult mb_equivalent(const RatedLts& a, const RatedLts& b, double tol) {
    RatedLts u = disjoint_union(a, b);
    MbResult res;
    res.block_of_state = mb_partition(u, tol);
    res.num_blocks =
        res.block_of_state.empty()
            ? 0
            : *std::max_element(res.block_of_state.begin(), res.block_of_state.end()) + 1;
    std::size_t i1 = a.initial;
    std::size_t i2 = a.num_states + b.initial;
    res.equivalent = res.block_of_state[i1] == res.block_of_state[i2];
    if (!res.equivalent) {
        // at the fixpoint, separated states differ on some bucket
        Signature s1 = state_signature(u, i1, res.block_of_state);
        Signature s2 = state_signature(u, i2, res.block_of_state);
        std::map<std::pair<std::string, std::size_t>, std::pair<double, double>> merged;
        for (const auto& [act, blk, r] : s1) merged[{act, blk}].first = r;
        for (const auto& [act, blk, r] : s2) merged[{act, blk}].second = r;
        for (const auto& [k, rates] : merged) {
            if (std::abs(rates.first - rates.second) > tol) {
                res.witness = MbWitness{k.first, k.second, rates.first, rates.second};
                break;
            }
        }
    }
    return res;
}

namespace {

// Runs of both systems up to a length bound, stored as a forest: each run
// knows its parent (one step shorter) and the move taken last.
struct RunNode {
    std::size_t parent = static_cast<std::size_t>(-1);
    std::size_t last_move = 0;  // move index in the union
    std::size_t final_state = 0;
    std::size_t length = 0;
};

struct RunForest {
    std::vector<RunNode> nodes;                       // nodes[0], nodes[1]: the empty runs
    std::vector<std::vector<std::size_t>> children;   // node -> extensions
};

RunForest build_runs(const RatedLts& u, std::size_t init1, std::size_t init2,
                     std::size_t depth) {
    RunForest f;
    f.nodes.push_back({static_cast<std::size_t>(-1), 0, init1, 0});
    f.nodes.push_back({static_cast<std::size_t>(-1), 0, init2, 0});
    std::vector<std::vector<std::size_t>> moves_from(u.num_states);
    for (std::size_t m = 0; m < u.moves.size(); ++m) moves_from[u.moves[m].from].push_back(m);
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
        f.children.emplace_back();
        if (f.nodes[i].length >= depth) continue;
        for (std::size_t m : moves_from[f.nodes[i].final_state]) {
            f.children[i].push_back(f.nodes.size());
            f.nodes.push_back({i, m, u.moves[m].to, f.nodes[i].length + 1});
        }
    }
    f.children.resize(f.nodes.size());
    return f;
}

// Refines runs of length <= budget; `rated_incoming` selects between testing
// the incoming step's rate or only its existence. Returns whether the two
// empty runs end up related.
bool refine_runs(const RatedLts& u, const RunForest& f, std::size_t budget, bool rated_incoming,
                 double tol) {
    std::vector<std::size_t> carrier;
    std::vector<std::size_t> slot(f.nodes.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < f.nodes.size(); ++i)
        if (f.nodes[i].length <= budget) {
            slot[i] = carrier.size();
            carrier.push_back(i);
        }

    // runs of different length can never be related: an incoming step only
    // ever comes from the one-shorter prefix
    std::vector<std::size_t> block(carrier.size());
    std::size_t num_blocks = budget + 1;
    for (std::size_t k = 0; k < carrier.size(); ++k) block[k] = f.nodes[carrier[k]].length;

    auto sig_of = [&](std::size_t k) {
        const std::size_t node = carrier[k];
        const RunNode& rn = f.nodes[node];
        Signature sig;
        std::map<std::pair<std::string, std::size_t>, double> out;
        if (rn.length < budget) {
            for (std::size_t child : f.children[node]) {
                const RatedMove& m = u.moves[f.nodes[child].last_move];
                out[{"o" + m.action, block[slot[child]]}] += m.rate;
            }
        }
        for (const auto& [k2, v] : out) sig.emplace_back(k2.first, k2.second, v);
        if (rn.length > 0) {
            const RatedMove& m = u.moves[rn.last_move];
            sig.emplace_back("i" + m.action, block[slot[rn.parent]],
                             rated_incoming ? m.rate : 1.0);
        }
        return sig;
    };

    bool changed = true;
    while (changed) changed = refine_once(block, num_blocks, sig_of, tol);
    return block[slot[0]] == block[slot[1]];
}

}  // namespace

FbmbResult fbmb_check(const RatedLts& a, const RatedLts& b, std::size_t depth, double tol) {
    if (depth == 0) throw std::invalid_argument("depth must be at least 1");
    RatedLts u = disjoint_union(a, b);
    RunForest f = build_runs(u, a.initial, a.num_states + b.initial, depth);
    for (std::size_t budget = 1; budget <= depth; ++budget)
        if (!refine_runs(u, f, budget, true, tol)) return {false, budget};
    return {true, depth};
}

bool ftabmb_equivalent(const RatedLts& a, const RatedLts& b, std::size_t audit_depth,
                       double tol) {
    bool verdict = mb_equivalent(a, b, tol).equivalent;
    if (audit_depth > 0) {
        RatedLts u = disjoint_union(a, b);
        RunForest f = build_runs(u, a.initial, a.num_states + b.initial, audit_depth);
        bool direct = true;
        for (std::size_t budget = 1; budget <= audit_depth && direct; ++budget)
            direct = refine_runs(u, f, budget, false, tol);
        if (direct != verdict)
            throw AuditError(
                "run-based back-and-forth check disagrees with partition refinement");
    }
    return verdict;
}

std::vector<ColoredStep> colored_trace(const RatedLts& l,
                                       const std::vector<std::size_t>& block_of_state,
                                       const Run& run) {
    if (block_of_state.size() != l.num_states)
        throw std::invalid_argument("partition size does not match the system");
    std::vector<ColoredStep> trace;
    std::size_t at = run.origin;
    for (std::size_t mi : run.moves) {
        const RatedMove& m = l.moves.at(mi);
        if (m.from != at) throw std::invalid_argument("run steps do not chain");
        trace.push_back({block_of_state[m.from], m.action, m.rate, block_of_state[m.to]});
        at = m.to;
    }
    return trace;
}

std::string partition_to_json(const RatedLts& a, const RatedLts& b, const MbResult& result) {
    nlohmann::json j;
    j["equivalent"] = result.equivalent;
    auto name = [&](std::size_t u) {
        bool left = u < a.num_states;
        const RatedLts& sys = left ? a : b;
        std::size_t i = left ? u : u - a.num_states;
        std::string base = sys.state_names.empty() ? std::to_string(i) : sys.state_names[i];
        return (left ? "L:" : "R:") + base;
    };
    std::vector<nlohmann::json> blocks(result.num_blocks);
    for (auto& blk : blocks) blk = nlohmann::json::array();
    for (std::size_t u = 0; u < result.block_of_state.size(); ++u)
        blocks[result.block_of_state[u]].push_back(name(u));
    j["blocks"] = blocks;
    if (result.witness) {
        j["witness"] = {{"action", result.witness->action},
                        {"block", result.witness->block},
                        {"rateLeft", result.witness->rate_left},
                        {"rateRight", result.witness->rate_right}};
    } else {
        j["witness"] = nullptr;
    }
    return j.dump(2);
}

}  // namespace rmpc
