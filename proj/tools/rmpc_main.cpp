// Command-line front end. Everything goes through the public C API; this
// file only does argument handling, file I/O and rendering.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rmpc/rmpc.h>

namespace {

// Exit codes: 0 holds/success, 1 analyzed property fails, 2 usage or parse
// error, 3 resource limit, 4 internal.
constexpr int kExitOk = 0;
constexpr int kExitPropertyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLimit = 3;
constexpr int kExitInternal = 4;

int exit_code_for(rmpc_status s) {
    switch (s) {
        case RMPC_OK:
            return kExitOk;
        case RMPC_ERR_PARSE:
        case RMPC_ERR_ILL_FORMED:
        case RMPC_ERR_INVALID:
            return kExitUsage;
        case RMPC_ERR_TRUNCATED:
            return kExitLimit;
        default:
            return kExitInternal;
    }
}

[[noreturn]] void die(rmpc_status s) {
    std::fprintf(stderr, "error: %s\n", rmpc_last_error());
    std::exit(exit_code_for(s));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
        std::exit(kExitUsage);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Owning wrappers so early exits cannot leak handles.
struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { rmpc_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct OwnedTerm {
    rmpc_term* p = nullptr;
    ~OwnedTerm() { rmpc_term_free(p); }
};

struct OwnedPolicy {
    rmpc_policy* p = nullptr;
    ~OwnedPolicy() { rmpc_policy_free(p); }
};

struct OwnedLts {
    rmpc_lts* p = nullptr;
    ~OwnedLts() { rmpc_lts_free(p); }
};

struct OwnedCtmc {
    rmpc_ctmc* p = nullptr;
    ~OwnedCtmc() { rmpc_ctmc_free(p); }
};

struct OwnedDoubles {
    double* p = nullptr;
    size_t n = 0;
    ~OwnedDoubles() { rmpc_doubles_free(p); }
};

// Shared option values.
struct CommonOpts {
    std::string policy = "equal";
    std::size_t max_states = 0;  // 0 = library default
    double tol = 0.0;
    std::size_t cycle_bound = 0;
    std::size_t depth = 0;
    std::string format = "text";
};

void load_term(const std::string& path, OwnedTerm& term) {
    std::string text = read_file(path);
    if (rmpc_status s = rmpc_term_parse(text.c_str(), &term.p)) die(s);
    if (rmpc_status s = rmpc_term_check(term.p)) die(s);
}

void load_policy(const std::string& choice, OwnedPolicy& policy) {
    rmpc_status s;
    if (choice == "equal") {
        s = rmpc_policy_equal(&policy.p);
    } else {
        std::string text = read_file(choice);
        s = rmpc_policy_from_json(text.c_str(), &policy.p);
    }
    if (s) die(s);
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

int cmd_parse(const std::string& file, const std::string& format) {
    OwnedTerm term;
    load_term(file, term);
    OwnedTerm canonical;
    if (rmpc_status s = rmpc_term_canonical(term.p, &canonical.p)) die(s);
    OwnedString text;
    if (rmpc_status s = rmpc_term_format(canonical.p, &text.p)) die(s);
    if (format == "json") {
        nlohmann::json j;
        j["term"] = text.str();
        j["wellFormed"] = true;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s\n", text.p);
    }
    return kExitOk;
}

int cmd_explore(const std::string& file, const CommonOpts& opts) {
    OwnedTerm term;
    load_term(file, term);
    OwnedPolicy policy;
    load_policy(opts.policy, policy);
    OwnedLts lts;
    if (rmpc_status s = rmpc_lts_build(term.p, policy.p, opts.max_states, &lts.p)) die(s);
    int truncated = 0;
    rmpc_lts_truncated(lts.p, &truncated);

    if (opts.format == "dot") {
        OwnedString dot;
        if (rmpc_status s = rmpc_lts_to_dot(lts.p, &dot.p)) die(s);
        std::printf("%s", dot.p);
    } else {
        OwnedString js;
        if (rmpc_status s = rmpc_lts_to_json(lts.p, &js.p)) die(s);
        if (opts.format == "json") {
            std::printf("%s\n", js.p);
        } else {
            nlohmann::json j = nlohmann::json::parse(js.str());
            std::printf("states: %zu%s\n", j["states"].size(), truncated ? " (truncated)" : "");
            for (std::size_t i = 0; i < j["states"].size(); ++i)
                std::printf("  [%zu] %s\n", i, j["states"][i].get<std::string>().c_str());
            std::printf("transitions: %zu\n", j["transitions"].size());
            for (const auto& e : j["transitions"]) {
                bool bk = e["direction"] == "backward";
                std::printf("  [%zu] -> [%zu]  %s<%s,%s>[%zu]\n", e["from"].get<std::size_t>(),
                            e["to"].get<std::size_t>(), bk ? "~" : "",
                            e["action"].get<std::string>().c_str(),
                            fmt(e["rate"].get<double>()).c_str(), e["key"].get<std::size_t>());
            }
        }
    }
    if (truncated) {
        std::fprintf(stderr, "error: state space truncated at the configured bound\n");
        return kExitLimit;
    }
    return kExitOk;
}

// A model file holds a term; a chain file (first significant byte '{') holds
// a ready-made CTMC in JSON form, rates baked in.
bool looks_like_chain_json(const std::string& text) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
        return c == '{';
    }
    return false;
}

int cmd_analyze(const std::string& file, const CommonOpts& opts, const std::string& steady_csv,
                bool product_form) {
    OwnedTerm term;
    OwnedPolicy policy;
    load_policy(opts.policy, policy);
    OwnedCtmc ctmc;
    std::string text = read_file(file);
    if (looks_like_chain_json(text)) {
        if (product_form) {
            std::fprintf(stderr, "error: --product-form needs a term model, not a chain file\n");
            return kExitUsage;
        }
        if (rmpc_status s = rmpc_ctmc_parse(text.c_str(), &ctmc.p)) die(s);
    } else {
        if (rmpc_status s = rmpc_term_parse(text.c_str(), &term.p)) die(s);
        if (rmpc_status s = rmpc_term_check(term.p)) die(s);
        if (rmpc_status s = rmpc_ctmc_build(term.p, policy.p, opts.max_states, &ctmc.p)) die(s);
    }

    OwnedString cjson;
    if (rmpc_status s = rmpc_ctmc_to_json(ctmc.p, &cjson.p)) die(s);
    nlohmann::json cj = nlohmann::json::parse(cjson.str());
    std::vector<std::string> names = cj["states"].get<std::vector<std::string>>();

    OwnedDoubles pi;
    if (rmpc_status s = rmpc_ctmc_steady_state(ctmc.p, &pi.p, &pi.n)) die(s);

    int reversible = 0;
    OwnedString report;
    if (rmpc_status s =
            rmpc_ctmc_reversibility(ctmc.p, opts.tol, opts.cycle_bound, &reversible, &report.p))
        die(s);
    nlohmann::json rj = nlohmann::json::parse(report.str());

    if (!steady_csv.empty()) {
        std::ofstream out(steady_csv, std::ios::binary);
        if (!out) {
            std::fprintf(stderr, "error: cannot write %s\n", steady_csv.c_str());
            return kExitUsage;
        }
        out << "state,probability\n";
        for (size_t i = 0; i < pi.n; ++i)
            out << csv_quote(names[i]) << "," << fmt(pi.p[i]) << "\n";
    }

    int pf_holds = -1;
    nlohmann::json pfj;
    if (product_form) {
        OwnedString pf;
        int holds = 0;
        if (rmpc_status s = rmpc_product_form(term.p, policy.p, opts.tol, opts.max_states, &holds,
                                              &pf.p))
            die(s);
        pf_holds = holds;
        pfj = nlohmann::json::parse(pf.str());
    }

    if (opts.format == "json") {
        nlohmann::json j;
        j["states"] = names;
        nlohmann::json ss = nlohmann::json::array();
        for (size_t i = 0; i < pi.n; ++i)
            ss.push_back({{"state", names[i]}, {"probability", pi.p[i]}});
        j["steadyState"] = std::move(ss);
        j["reversibility"] = rj;
        if (pf_holds >= 0) j["productForm"] = pfj;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("states: %zu\n", pi.n);
        std::printf("steady state:\n");
        for (size_t i = 0; i < pi.n; ++i)
            std::printf("  pi(%s) = %s\n", names[i].c_str(), fmt(pi.p[i]).c_str());
        std::printf("time reversible: %s\n", reversible ? "yes" : "no");
        std::printf("max detailed-balance residual: %s (tolerance %s)\n",
                    fmt(rj["maxDetailedBalanceResidual"].get<double>()).c_str(),
                    fmt(rj["tolerance"].get<double>()).c_str());
        if (!rj["failingPairs"].empty()) {
            std::printf("failing pairs:\n");
            for (const auto& v : rj["failingPairs"])
                std::printf("  (%s, %s) residual %s\n",
                            names[v["s1"].get<std::size_t>()].c_str(),
                            names[v["s2"].get<std::size_t>()].c_str(),
                            fmt(v["residual"].get<double>()).c_str());
        }
        if (!rj["failingCycles"].empty()) {
            std::printf("failing cycles:\n");
            for (const auto& v : rj["failingCycles"]) {
                std::string path;
                for (const auto& s : v["states"]) {
                    if (!path.empty()) path += " -> ";
                    path += "[" + std::to_string(s.get<std::size_t>()) + "]";
                }
                std::printf("  %s  products %s vs %s\n", path.c_str(),
                            fmt(v["forwardProduct"].get<double>()).c_str(),
                            fmt(v["reverseProduct"].get<double>()).c_str());
            }
        }
        if (pf_holds >= 0) {
            std::printf("product form: %s\n", pf_holds == 1 ? "yes" : "no");
            if (pfj.contains("preconditionNote"))
                std::printf("  note: %s\n", pfj["preconditionNote"].get<std::string>().c_str());
            std::printf("  cartesian: %s, max factorization error: %s\n",
                        pfj["cartesian"].get<bool>() ? "yes" : "no",
                        fmt(pfj["maxError"].get<double>()).c_str());
        }
    }
    return reversible ? kExitOk : kExitPropertyFailed;
}

int cmd_bisim(const std::string& file_a, const std::string& file_b, const std::string& relation,
              const CommonOpts& opts) {
    OwnedTerm a, b;
    load_term(file_a, a);
    load_term(file_b, b);
    OwnedPolicy policy;
    load_policy(opts.policy, policy);

    rmpc_bisim_kind kind;
    if (relation == "mb")
        kind = RMPC_BISIM_MB;
    else if (relation == "fbmb")
        kind = RMPC_BISIM_FBMB;
    else if (relation == "ftabmb")
        kind = RMPC_BISIM_FTABMB;
    else {
        std::fprintf(stderr, "error: unknown relation '%s' (use mb, fbmb or ftabmb)\n",
                     relation.c_str());
        return kExitUsage;
    }

    int equivalent = 0;
    OwnedString detail;
    if (rmpc_status s =
            rmpc_bisim_check(a.p, b.p, policy.p, kind, opts.depth, &equivalent, &detail.p))
        die(s);

    if (opts.format == "json") {
        std::printf("%s\n", detail.p);
    } else {
        nlohmann::json dj = nlohmann::json::parse(detail.str());
        if (kind == RMPC_BISIM_FBMB) {
            if (equivalent)
                std::printf("fbmb: equivalent up to depth %zu\n",
                            dj["checkedDepth"].get<std::size_t>());
            else
                std::printf("fbmb: distinguished at depth %zu\n",
                            dj["distinguishedAtDepth"].get<std::size_t>());
        } else {
            std::printf("%s: %s\n", relation.c_str(),
                        equivalent ? "equivalent" : "distinguished");
            if (!equivalent && dj.contains("witness") && !dj["witness"].is_null()) {
                const auto& w = dj["witness"];
                std::printf("  witness: action %s into block %zu, rates %s vs %s\n",
                            w["action"].get<std::string>().c_str(),
                            w["block"].get<std::size_t>(),
                            fmt(w["rateLeft"].get<double>()).c_str(),
                            fmt(w["rateRight"].get<double>()).c_str());
            }
        }
    }
    return equivalent ? kExitOk : kExitPropertyFailed;
}

int cmd_trace(const std::string& file, const std::string& script_path,
              const std::string& ref_path, const CommonOpts& opts) {
    OwnedTerm term;
    load_term(file, term);
    OwnedPolicy policy;
    load_policy(opts.policy, policy);

    std::string script = read_file(script_path);
    std::string ref;
    if (!ref_path.empty()) ref = read_file(ref_path);

    int ok = 0;
    OwnedString report;
    if (rmpc_status s = rmpc_trace_replay(term.p, policy.p, script.c_str(),
                                          ref_path.empty() ? nullptr : ref.c_str(), &ok,
                                          &report.p))
        die(s);
    nlohmann::json rj = nlohmann::json::parse(report.str());

    if (opts.format == "json") {
        std::printf("%s\n", report.p);
    } else {
        std::printf("start: %s\n", rj["start"].get<std::string>().c_str());
        for (const auto& st : rj["steps"]) {
            bool bk = st["direction"] == "backward";
            std::printf("  %s<%s,%s>[%zu] -> %s\n", bk ? "~" : "",
                        st["action"].get<std::string>().c_str(),
                        fmt(st["rate"].get<double>()).c_str(), st["key"].get<std::size_t>(),
                        st["target"].get<std::string>().c_str());
        }
        if (ok) {
            std::printf("end: %s\n", rj["end"].get<std::string>().c_str());
            std::printf("valid computation: %s\n",
                        rj["validComputation"].get<bool>() ? "yes" : "no");
            std::printf("returned to start: %s\n",
                        rj["returnedToStart"].get<bool>() ? "yes" : "no");
            if (rj.contains("refCausallyEquivalent"))
                std::printf("causally equivalent to reference: %s\n",
                            rj["refCausallyEquivalent"].get<bool>() ? "yes" : "no");
        }
        if (rj.contains("notes"))
            for (const auto& n : rj["notes"])
                std::printf("note: %s\n", n.get<std::string>().c_str());
    }

    if (!ok) {
        std::fprintf(stderr, "error: %s\n", rj["error"].get<std::string>().c_str());
        std::fprintf(stderr, "enabled moves:\n");
        for (const auto& e : rj["enabled"])
            std::fprintf(stderr, "  %s\n", e.get<std::string>().c_str());
        return kExitPropertyFailed;
    }
    if (rj.contains("refCausallyEquivalent") && !rj["refCausallyEquivalent"].get<bool>())
        return kExitPropertyFailed;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for a reversible Markovian process calculus"};
    app.require_subcommand(1);
    std::size_t seed = 0;
    app.add_option("--seed", seed, "seed for randomized runs (reserved)");

    CommonOpts opts;
    std::string file, file_b, relation, script_path, ref_path, steady_csv;
    bool check_product_form = false;

    auto add_common = [&](CLI::App* cmd, bool with_dot) {
        cmd->add_option("--policy", opts.policy,
                        "backward rate policy: 'equal' or a JSON multiplier table file");
        cmd->add_option("--max-states", opts.max_states, "state-space exploration bound");
        cmd->add_option("--tol", opts.tol, "numeric comparison tolerance");
        cmd->add_option("--cycle-bound", opts.cycle_bound, "max cycle length checked");
        cmd->add_option("--depth", opts.depth, "run-length bound for fbmb/ftabmb");
        cmd->add_option("--format", opts.format, "output format")
            ->check(CLI::IsMember(with_dot ? std::vector<std::string>{"text", "json", "dot"}
                                           : std::vector<std::string>{"text", "json"}));
    };

    CLI::App* parse = app.add_subcommand("parse", "parse a model file and echo the term");
    parse->add_option("file", file, "model file")->required();
    add_common(parse, false);

    CLI::App* explore = app.add_subcommand("explore", "derive the reachable transition system");
    explore->add_option("file", file, "model file")->required();
    add_common(explore, true);

    CLI::App* analyze =
        app.add_subcommand("analyze", "steady-state and time-reversibility analysis");
    analyze->add_option("file", file, "model file")->required();
    add_common(analyze, false);
    analyze->add_option("--steady-csv", steady_csv, "write the steady state to a CSV file");
    analyze->add_flag("--product-form", check_product_form,
                      "also check the product-form criterion (root must be parallel)");

    CLI::App* bisim = app.add_subcommand("bisim", "compare two models");
    bisim->add_option("file_a", file, "first model file")->required();
    bisim->add_option("file_b", file_b, "second model file")->required();
    bisim->add_option("relation", relation, "mb, fbmb or ftabmb")->required();
    add_common(bisim, false);

    CLI::App* trace = app.add_subcommand("trace", "replay a step script");
    trace->add_option("file", file, "model file")->required();
    trace->add_option("--script", script_path, "JSON step script")->required();
    trace->add_option("--ref", ref_path, "reference script to compare against");
    add_common(trace, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (parse->parsed()) return cmd_parse(file, opts.format);
    if (explore->parsed()) return cmd_explore(file, opts);
    if (analyze->parsed()) return cmd_analyze(file, opts, steady_csv, check_product_form);
    if (bisim->parsed()) return cmd_bisim(file, file_b, relation, opts);
    if (trace->parsed()) return cmd_trace(file, script_path, ref_path, opts);
    return kExitUsage;
}
