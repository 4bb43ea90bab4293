#include "core/ctmc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "core/errors.hpp"

namespace rmpc {

Ctmc make_ctmc(std::vector<std::string> state_names, std::size_t initial,
               std::vector<CtmcMove> moves) {
    std::size_t n = state_names.size();
    if (n == 0) throw std::invalid_argument("a chain needs at least one state");
    if (initial >= n) throw std::invalid_argument("initial state out of range");
    Ctmc c;
    c.state_names = std::move(state_names);
    c.initial = initial;
    c.generator.assign(n * n, 0.0);
    for (const CtmcMove& m : moves) {
        if (m.from >= n || m.to >= n) throw std::invalid_argument("move endpoint out of range");
        if (m.from == m.to) throw std::invalid_argument("self-loop moves are not allowed");
        if (!(m.rate > 0.0)) throw std::invalid_argument("move rates must be positive");
        c.generator[m.from * n + m.to] += m.rate;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row += c.generator[i * n + j];
        c.generator[i * n + i] = -row;
    }
    c.moves = std::move(moves);
    return c;
}

Ctmc build_ctmc(const TermPtr& start, const BackwardRatePolicy& policy, std::size_t max_states) {
    Lts lts = explore(start, policy, max_states);
    if (lts.truncated) throw TruncatedError(lts.note);
    std::vector<std::string> names;
    names.reserve(lts.states.size());
    for (const TermPtr& s : lts.states) names.push_back(format_term(s));
    std::vector<CtmcMove> moves;
    moves.reserve(lts.edges.size());
    for (const LtsEdge& e : lts.edges)
        moves.push_back({e.from, e.to, e.transition.label.dir, e.transition.label.action,
                         e.transition.label.rate});
    Ctmc c = make_ctmc(std::move(names), 0, std::move(moves));
    c.state_terms = lts.states;
    return c;
}

StateMetrics state_metrics(const Ctmc& c, std::size_t state) {
    if (state >= c.size()) throw std::invalid_argument("state out of range");
    StateMetrics m;
    for (std::size_t i = 0; i < c.moves.size(); ++i)
        if (c.moves[i].from == state) m.exit_rate += c.moves[i].rate;
    if (m.exit_rate > 0.0) {
        m.mean_sojourn = 1.0 / m.exit_rate;
        for (std::size_t i = 0; i < c.moves.size(); ++i)
            if (c.moves[i].from == state)
                m.jumps.push_back({i, c.moves[i].rate / m.exit_rate});
    } else {
        m.mean_sojourn = std::numeric_limits<double>::infinity();
    }
    return m;
}

namespace {

// Iterative Tarjan strongly-connected components; returns the number of
// components.
std::size_t count_sccs(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next = 0, sccs = 0;

    struct Frame {
        std::size_t v;
        std::size_t child;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = static_cast<int>(next++);
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.child < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = static_cast<int>(next++);
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    ++sccs;
                    while (true) {
                        std::size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        if (w == f.v) break;
                    }
                }
                std::size_t v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    return sccs;
}

}  // namespace

bool is_ergodic(const Ctmc& c) {
    std::size_t n = c.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const CtmcMove& m : c.moves) adj[m.from].push_back(m.to);
    return count_sccs(n, adj) == 1;
}

std::vector<double> steady_state(const Ctmc& c, double tol) {
    if (!is_ergodic(c))
        throw NotErgodicError("steady-state distribution requires an ergodic chain");
    std::size_t n = c.size();
    if (n == 1) return {1.0};

    // balance equations indexed by target state; the last one is replaced by
    // the normalization sum(pi) = 1
    Eigen::MatrixXd a(n, n);
    for (std::size_t j = 0; j + 1 < n; ++j)
        for (std::size_t i = 0; i < n; ++i) a(j, i) = c.q(i, j);
    for (std::size_t i = 0; i < n; ++i) a(n - 1, i) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::VectorXd pi = a.partialPivLu().solve(b);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = pi(i);
        if (!std::isfinite(out[i]) || out[i] <= 0.0)
            throw NumericError("steady-state solve produced a non-positive probability");
    }
    for (std::size_t j = 0; j < n; ++j) {
        double balance = 0.0;
        for (std::size_t i = 0; i < n; ++i) balance += out[i] * c.q(i, j);
        if (std::abs(balance) > tol)
            throw NumericError("steady-state residual " + std::to_string(std::abs(balance)) +
                               " exceeds tolerance");
    }
    return out;
}

namespace {

void check_pi(const Ctmc& c, const std::vector<double>& pi) {
    if (pi.size() != c.size())
        throw std::invalid_argument("distribution size does not match the chain");
    for (double p : pi)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("distribution entries must be positive");
}

}  // namespace

ReversibilityReport check_time_reversibility(const Ctmc& c, const std::vector<double>& pi,
                                             double tol, std::size_t max_cycle_len) {
    check_pi(c, pi);
    ReversibilityReport report;
    report.tolerance = tol;
    report.cycle_bound = max_cycle_len;
    std::size_t n = c.size();

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double r = std::abs(pi[i] * c.q(i, j) - pi[j] * c.q(j, i));
            report.max_detailed_balance_residual =
                std::max(report.max_detailed_balance_residual, r);
            if (r > tol) report.failing_pairs.push_back({i, j, r});
        }
    }

    // simple cycles of length 3..max_cycle_len, each taken once: anchored at
    // their smallest state, one orientation only
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && (c.q(i, j) > 0.0 || c.q(j, i) > 0.0)) adj[i].push_back(j);

    std::vector<std::size_t> path;
    std::vector<bool> on_path(n, false);
    auto consider = [&](std::size_t anchor) {
        double f = 1.0, r = 1.0;
        for (std::size_t k = 0; k < path.size(); ++k) {
            std::size_t from = path[k];
            std::size_t to = path[(k + 1) % path.size()];
            f *= c.q(from, to);
            r *= c.q(to, from);
        }
        (void)anchor;
        if (std::abs(f - r) > tol * std::max({1.0, std::abs(f), std::abs(r)}))
            report.failing_cycles.push_back({path, f, r});
    };
    auto dfs = [&](auto&& self, std::size_t anchor, std::size_t v) -> void {
        for (std::size_t w : adj[v]) {
            if (w == anchor) {
                if (path.size() >= 3 && path[1] < path.back()) consider(anchor);
                continue;
            }
            if (w < anchor || on_path[w] || path.size() >= max_cycle_len) continue;
            path.push_back(w);
            on_path[w] = true;
            self(self, anchor, w);
            on_path[w] = false;
            path.pop_back();
        }
    };
    if (max_cycle_len >= 3) {
        for (std::size_t anchor = 0; anchor < n; ++anchor) {
            path.assign(1, anchor);
            on_path.assign(n, false);
            on_path[anchor] = true;
            dfs(dfs, anchor, anchor);
        }
    }

    report.reversible = report.failing_pairs.empty() && report.failing_cycles.empty();
    return report;
}

Ctmc reverse_ctmc(const Ctmc& c, const std::vector<double>& pi) {
    check_pi(c, pi);
    std::vector<CtmcMove> moves;
    moves.reserve(c.moves.size());
    for (const CtmcMove& m : c.moves) {
        Direction flipped =
            m.dir == Direction::Forward ? Direction::Backward : Direction::Forward;
        moves.push_back({m.to, m.from, flipped, m.action, m.rate * pi[m.from] / pi[m.to]});
    }
    Ctmc out = make_ctmc(c.state_names, c.initial, std::move(moves));
    out.state_terms = c.state_terms;
    return out;
}

namespace {

bool has_parallel(const Term& t) {
    switch (t.kind) {
        case TermKind::Nil:
            return false;
        case TermKind::Prefix:
            return has_parallel(*t.cont);
        case TermKind::Choice:
            return has_parallel(*t.left) || has_parallel(*t.right);
        case TermKind::Parallel:
            return true;
    }
    return false;
}

bool parallel_under_guard(const Term& t, bool guarded) {
    switch (t.kind) {
        case TermKind::Nil:
            return false;
        case TermKind::Prefix:
            return parallel_under_guard(*t.cont, true);
        case TermKind::Choice:
            return parallel_under_guard(*t.left, true) || parallel_under_guard(*t.right, true);
        case TermKind::Parallel:
            return guarded || parallel_under_guard(*t.left, guarded) ||
                   parallel_under_guard(*t.right, guarded);
    }
    return false;
}

}  // namespace

SyntaxClass classify_syntax(const TermPtr& t) {
    if (!has_parallel(*t)) return SyntaxClass::Sequential;
    if (!parallel_under_guard(*t, false)) return SyntaxClass::ParallelOuter;
    return SyntaxClass::General;
}

ProductFormReport check_product_form(const TermPtr& r1, const TermPtr& r2,
                                     std::vector<std::string> sync,
                                     const BackwardRatePolicy& policy, double tol,
                                     std::size_t max_states) {
    ProductFormReport report;
    if (!is_standard(r1) || !is_standard(r2))
        throw std::invalid_argument("product form is checked from standard components");

    bool sequential = classify_syntax(r1) == SyntaxClass::Sequential &&
                      classify_syntax(r2) == SyntaxClass::Sequential;
    if (policy.is_equal_policy()) {
        report.precondition_ok = true;
        report.precondition_note = "equal backward rates";
    } else if (sequential) {
        report.precondition_ok = true;
        report.precondition_note = "sequential components";
    } else {
        report.precondition_note =
            "hypotheses not met: needs the equal policy or two sequential components";
        return report;
    }

    Ctmc c1 = build_ctmc(r1, policy, max_states);
    Ctmc c2 = build_ctmc(r2, policy, max_states);
    Ctmc cc = build_ctmc(parallel(r1, r2, std::move(sync)), policy, max_states);
    report.component_states_1 = c1.size();
    report.component_states_2 = c2.size();
    report.composed_states = cc.size();

    std::map<std::string, std::size_t> idx1, idx2;
    for (std::size_t i = 0; i < c1.size(); ++i) idx1[c1.state_names[i]] = i;
    for (std::size_t i = 0; i < c2.size(); ++i) idx2[c2.state_names[i]] = i;

    // project composed states onto the two sides of the root parallel
    std::vector<std::pair<std::size_t, std::size_t>> projection(cc.size());
    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool projectable = true;
    for (std::size_t i = 0; i < cc.size() && projectable; ++i) {
        const TermPtr& s = cc.state_terms[i];
        std::string l = format_term(canonicalize_keys(s->left));
        std::string r = format_term(canonicalize_keys(s->right));
        auto i1 = idx1.find(l);
        auto i2 = idx2.find(r);
        if (i1 == idx1.end() || i2 == idx2.end()) {
            projectable = false;
            break;
        }
        projection[i] = {i1->second, i2->second};
        seen.insert(projection[i]);
    }
    report.cartesian = projectable && seen.size() == cc.size() &&
                       cc.size() == c1.size() * c2.size();
    if (!report.cartesian) return report;

    std::vector<double> pi1 = steady_state(c1, tol);
    std::vector<double> pi2 = steady_state(c2, tol);
    std::vector<double> pic = steady_state(cc, tol);
    for (std::size_t i = 0; i < cc.size(); ++i) {
        double expected = pi1[projection[i].first] * pi2[projection[i].second];
        report.max_error = std::max(report.max_error, std::abs(pic[i] - expected));
    }
    report.product_form = report.max_error <= tol;
    return report;
}

std::string ctmc_to_json(const Ctmc& c) {
    nlohmann::json j;
    j["initial"] = c.initial;
    j["states"] = c.state_names;
    auto& moves = j["moves"] = nlohmann::json::array();
    for (const CtmcMove& m : c.moves) {
        nlohmann::json jm;
        jm["from"] = m.from;
        jm["to"] = m.to;
        jm["direction"] = to_string(m.dir);
        jm["action"] = m.action;
        jm["rate"] = m.rate;
        moves.push_back(std::move(jm));
    }
    j["n"] = c.size();
    j["generator"] = c.generator;
    return j.dump(2);
}

Ctmc ctmc_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError("chain file is not a JSON object");
    if (!j.contains("states") || !j["states"].is_array() || j["states"].empty())
        throw ParseError("chain file needs a non-empty \"states\" array");
    std::vector<std::string> names;
    for (const auto& s : j["states"]) {
        if (!s.is_string()) throw ParseError("state names must be strings");
        names.push_back(s.get<std::string>());
    }
    std::size_t initial = j.value("initial", std::size_t{0});
    std::vector<CtmcMove> moves;
    for (const auto& m : j.value("moves", nlohmann::json::array())) {
        if (!m.is_object() || !m.contains("from") || !m.contains("to") || !m.contains("rate"))
            throw ParseError("each move needs \"from\", \"to\" and \"rate\"");
        std::string dir = m.value("direction", "forward");
        if (dir != "forward" && dir != "backward")
            throw ParseError("move direction must be \"forward\" or \"backward\"");
        moves.push_back({m["from"].get<std::size_t>(), m["to"].get<std::size_t>(),
                         dir == "forward" ? Direction::Forward : Direction::Backward,
                         m.value("action", ""), m["rate"].get<double>()});
    }
    try {
        return make_ctmc(std::move(names), initial, std::move(moves));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

std::string steady_state_to_csv(const Ctmc& c, const std::vector<double>& pi) {
    std::string out = "state,probability\n";
    char buf[64];
    for (std::size_t i = 0; i < c.size(); ++i) {
        out += '"';
        for (char ch : c.state_names[i]) {
            if (ch == '"') out += '"';
            out += ch;
        }
        out += "\",";
        auto res = std::to_chars(buf, buf + sizeof(buf), pi[i]);
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

std::string reversibility_report_to_json(const ReversibilityReport& r) {
    nlohmann::json j;
    j["reversible"] = r.reversible;
    j["maxDetailedBalanceResidual"] = r.max_detailed_balance_residual;
    j["tolerance"] = r.tolerance;
    j["cycleBound"] = r.cycle_bound;
    auto& pairs = j["failingPairs"] = nlohmann::json::array();
    for (const DetailedBalanceViolation& v : r.failing_pairs)
        pairs.push_back({{"s1", v.s1}, {"s2", v.s2}, {"residual", v.residual}});
    auto& cycles = j["failingCycles"] = nlohmann::json::array();
    for (const CycleViolation& v : r.failing_cycles)
        cycles.push_back({{"states", v.states},
                          {"forwardProduct", v.forward_product},
                          {"reverseProduct", v.reverse_product}});
    return j.dump(2);
}

std::string reversibility_report_to_text(const ReversibilityReport& r) {
    std::string out;
    out += r.reversible ? "time reversible: yes\n" : "time reversible: no\n";
    out += "max detailed-balance residual: " + std::to_string(r.max_detailed_balance_residual) +
           " (tolerance " + std::to_string(r.tolerance) + ")\n";
    if (!r.failing_pairs.empty()) {
        out += "failing pairs:\n";
        for (const DetailedBalanceViolation& v : r.failing_pairs)
            out += "  (" + std::to_string(v.s1) + "," + std::to_string(v.s2) +
                   ") residual " + std::to_string(v.residual) + "\n";
    }
    if (!r.failing_cycles.empty()) {
        out += "failing cycles (length <= " + std::to_string(r.cycle_bound) + "):\n";
        for (const CycleViolation& v : r.failing_cycles) {
            out += "  [";
            for (std::size_t i = 0; i < v.states.size(); ++i) {
                if (i) out += " -> ";
                out += std::to_string(v.states[i]);
            }
            out += "] products " + std::to_string(v.forward_product) + " vs " +
                   std::to_string(v.reverse_product) + "\n";
        }
    }
    return out;
}

}  // namespace rmpc
