#include "rmpc/rmpc.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "core/bisim.hpp"
#include "core/causality.hpp"
#include "core/ctmc.hpp"
#include "core/errors.hpp"
#include "core/lts.hpp"
#include "core/parser.hpp"
#include "core/policy.hpp"
#include "core/semantics.hpp"
#include "core/term.hpp"
#include "core/trace.hpp"

struct rmpc_term {
    rmpc::TermPtr value;
};
struct rmpc_policy {
    rmpc::BackwardRatePolicy value;
};
struct rmpc_lts {
    rmpc::Lts value;
};
struct rmpc_ctmc {
    rmpc::Ctmc value;
};

namespace {

thread_local std::string g_last_error = "no error";

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs `fn`, translating exceptions into status codes + last-error text.
template <typename Fn>
rmpc_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const rmpc::ParseError& e) {
        set_error(e.what());
        return RMPC_ERR_PARSE;
    } catch (const rmpc::IllFormedError& e) {
        set_error(e.what());
        return RMPC_ERR_ILL_FORMED;
    } catch (const rmpc::TruncatedError& e) {
        set_error(e.what());
        return RMPC_ERR_TRUNCATED;
    } catch (const rmpc::NotErgodicError& e) {
        set_error(e.what());
        return RMPC_ERR_NOT_ERGODIC;
    } catch (const rmpc::NumericError& e) {
        set_error(e.what());
        return RMPC_ERR_NUMERIC;
    } catch (const rmpc::AuditError& e) {
        set_error(e.what());
        return RMPC_ERR_AUDIT;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return RMPC_ERR_INVALID;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return RMPC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RMPC_ERR_INTERNAL;
    }
}

rmpc_status require(bool cond, const char* what) {
    if (cond) return RMPC_OK;
    set_error(std::string("invalid argument: ") + what);
    return RMPC_ERR_INVALID;
}

}  // namespace

extern "C" {

const char* rmpc_last_error(void) { return g_last_error.c_str(); }

void rmpc_string_free(char* s) { std::free(s); }
void rmpc_doubles_free(double* p) { std::free(p); }

rmpc_status rmpc_term_parse(const char* text, rmpc_term** out) {
    if (rmpc_status s = require(text && out, "text and out must be non-NULL")) return s;
    return guarded([&] {
        auto owned = new rmpc_term{rmpc::parse_model(text)};
        *out = owned;
        return RMPC_OK;
    });
}

void rmpc_term_free(rmpc_term* t) { delete t; }

rmpc_status rmpc_term_format(const rmpc_term* t, char** out) {
    if (rmpc_status s = require(t && out, "term and out must be non-NULL")) return s;
    return guarded([&] {
        *out = dup_string(rmpc::format_term(*t->value));
        return RMPC_OK;
    });
}

rmpc_status rmpc_term_check(const rmpc_term* t) {
    if (rmpc_status s = require(t != nullptr, "term must be non-NULL")) return s;
    return guarded([&] {
        auto diags = rmpc::check_well_formed(*t->value);
        if (diags.empty()) return RMPC_OK;
        std::string msg;
        for (const auto& d : diags) {
            if (!msg.empty()) msg += "; ";
            msg += d.message;
        }
        set_error(msg);
        return RMPC_ERR_ILL_FORMED;
    });
}

rmpc_status rmpc_term_canonical(const rmpc_term* t, rmpc_term** out) {
    if (rmpc_status s = require(t && out, "term and out must be non-NULL")) return s;
    return guarded([&] {
        *out = new rmpc_term{rmpc::canonicalize_keys(t->value)};
        return RMPC_OK;
    });
}

rmpc_status rmpc_term_key_equivalent(const rmpc_term* a, const rmpc_term* b, int* out) {
    if (rmpc_status s = require(a && b && out, "terms and out must be non-NULL")) return s;
    return guarded([&] {
        *out = rmpc::key_equivalent(a->value, b->value) ? 1 : 0;
        return RMPC_OK;
    });
}

rmpc_status rmpc_policy_equal(rmpc_policy** out) {
    if (rmpc_status s = require(out != nullptr, "out must be non-NULL")) return s;
    return guarded([&] {
        *out = new rmpc_policy{rmpc::BackwardRatePolicy::equal()};
        return RMPC_OK;
    });
}

rmpc_status rmpc_policy_from_json(const char* json_text, rmpc_policy** out) {
    if (rmpc_status s = require(json_text && out, "json_text and out must be non-NULL")) return s;
    return guarded([&] {
        *out = new rmpc_policy{rmpc::BackwardRatePolicy::from_json(json_text)};
        return RMPC_OK;
    });
}

void rmpc_policy_free(rmpc_policy* p) { delete p; }

rmpc_status rmpc_term_transitions(const rmpc_term* t, const rmpc_policy* p, char** out_json) {
    if (rmpc_status s = require(t && p && out_json, "term, policy and out must be non-NULL"))
        return s;
    return guarded([&] {
        nlohmann::json j;
        j["term"] = rmpc::format_term(*t->value);
        auto dump = [](const std::vector<rmpc::Transition>& ts) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& tr : ts) {
                nlohmann::json e;
                e["direction"] = rmpc::to_string(tr.label.dir);
                e["action"] = tr.label.action;
                e["rate"] = tr.label.rate;
                e["key"] = tr.label.key;
                e["target"] = rmpc::format_term(*tr.target);
                arr.push_back(std::move(e));
            }
            return arr;
        };
        j["forward"] = dump(rmpc::forward_transitions(t->value));
        j["backward"] = dump(rmpc::backward_transitions(t->value, p->value));
        *out_json = dup_string(j.dump(2));
        return RMPC_OK;
    });
}

rmpc_status rmpc_lts_build(const rmpc_term* t, const rmpc_policy* p, size_t max_states,
                           rmpc_lts** out) {
    if (rmpc_status s = require(t && p && out, "term, policy and out must be non-NULL")) return s;
    return guarded([&] {
        size_t bound = max_states ? max_states : rmpc::kDefaultMaxStates;
        *out = new rmpc_lts{rmpc::explore(t->value, p->value, bound)};
        return RMPC_OK;
    });
}

void rmpc_lts_free(rmpc_lts* l) { delete l; }

rmpc_status rmpc_lts_num_states(const rmpc_lts* l, size_t* out) {
    if (rmpc_status s = require(l && out, "lts and out must be non-NULL")) return s;
    *out = l->value.states.size();
    return RMPC_OK;
}

rmpc_status rmpc_lts_truncated(const rmpc_lts* l, int* out) {
    if (rmpc_status s = require(l && out, "lts and out must be non-NULL")) return s;
    *out = l->value.truncated ? 1 : 0;
    return RMPC_OK;
}

rmpc_status rmpc_lts_to_json(const rmpc_lts* l, char** out) {
    if (rmpc_status s = require(l && out, "lts and out must be non-NULL")) return s;
    return guarded([&] {
        *out = dup_string(rmpc::lts_to_json(l->value));
        return RMPC_OK;
    });
}

rmpc_status rmpc_lts_to_dot(const rmpc_lts* l, char** out) {
    if (rmpc_status s = require(l && out, "lts and out must be non-NULL")) return s;
    return guarded([&] {
        *out = dup_string(rmpc::lts_to_dot(l->value));
        return RMPC_OK;
    });
}

rmpc_status rmpc_ctmc_build(const rmpc_term* t, const rmpc_policy* p, size_t max_states,
                            rmpc_ctmc** out) {
    if (rmpc_status s = require(t && p && out, "term, policy and out must be non-NULL")) return s;
    return guarded([&] {
        size_t bound = max_states ? max_states : rmpc::kDefaultMaxStates;
        *out = new rmpc_ctmc{rmpc::build_ctmc(t->value, p->value, bound)};
        return RMPC_OK;
    });
}

rmpc_status rmpc_ctmc_parse(const char* json_text, rmpc_ctmc** out) {
    if (rmpc_status s = require(json_text && out, "json_text and out must be non-NULL")) return s;
    return guarded([&] {
        *out = new rmpc_ctmc{rmpc::ctmc_from_json(json_text)};
        return RMPC_OK;
    });
}

void rmpc_ctmc_free(rmpc_ctmc* c) { delete c; }

rmpc_status rmpc_ctmc_num_states(const rmpc_ctmc* c, size_t* out) {
    if (rmpc_status s = require(c && out, "ctmc and out must be non-NULL")) return s;
    *out = c->value.state_names.size();
    return RMPC_OK;
}

rmpc_status rmpc_ctmc_to_json(const rmpc_ctmc* c, char** out) {
    if (rmpc_status s = require(c && out, "ctmc and out must be non-NULL")) return s;
    return guarded([&] {
        *out = dup_string(rmpc::ctmc_to_json(c->value));
        return RMPC_OK;
    });
}

rmpc_status rmpc_ctmc_steady_state(const rmpc_ctmc* c, double** out, size_t* n) {
    if (rmpc_status s = require(c && out && n, "ctmc, out and n must be non-NULL")) return s;
    return guarded([&] {
        std::vector<double> pi = rmpc::steady_state(c->value);
        double* buf = static_cast<double*>(std::malloc(pi.size() * sizeof(double)));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, pi.data(), pi.size() * sizeof(double));
        *out = buf;
        *n = pi.size();
        return RMPC_OK;
    });
}

rmpc_status rmpc_ctmc_reversibility(const rmpc_ctmc* c, double tol, size_t cycle_bound,
                                    int* out_reversible, char** out_report_json) {
    if (rmpc_status s = require(c && out_reversible, "ctmc and out_reversible must be non-NULL"))
        return s;
    return guarded([&] {
        double use_tol = tol > 0.0 ? tol : rmpc::kDefaultTolerance;
        size_t bound = cycle_bound ? cycle_bound : rmpc::kDefaultCycleBound;
        std::vector<double> pi = rmpc::steady_state(c->value, use_tol);
        rmpc::ReversibilityReport rep = rmpc::check_time_reversibility(c->value, pi, use_tol, bound);
        *out_reversible = rep.reversible ? 1 : 0;
        if (out_report_json) *out_report_json = dup_string(rmpc::reversibility_report_to_json(rep));
        return RMPC_OK;
    });
}

rmpc_status rmpc_product_form(const rmpc_term* composed, const rmpc_policy* p, double tol,
                              size_t max_states, int* out_holds, char** out_report_json) {
    if (rmpc_status s =
            require(composed && p && out_holds, "term, policy and out_holds must be non-NULL"))
        return s;
    return guarded([&] {
        const rmpc::Term& root = *composed->value;
        if (root.kind != rmpc::TermKind::Parallel) {
            set_error("product-form check needs a parallel composition at the root");
            return RMPC_ERR_INVALID;
        }
        double use_tol = tol > 0.0 ? tol : rmpc::kDefaultTolerance;
        size_t bound = max_states ? max_states : rmpc::kDefaultMaxStates;
        rmpc::ProductFormReport rep =
            rmpc::check_product_form(root.left, root.right, root.sync, p->value, use_tol, bound);
        *out_holds = (rep.precondition_ok && rep.cartesian && rep.product_form) ? 1 : 0;
        if (out_report_json) {
            nlohmann::json j;
            j["preconditionOk"] = rep.precondition_ok;
            if (!rep.precondition_note.empty()) j["preconditionNote"] = rep.precondition_note;
            j["cartesian"] = rep.cartesian;
            j["productForm"] = rep.product_form;
            j["maxError"] = rep.max_error;
            j["componentStates"] = {rep.component_states_1, rep.component_states_2};
            j["composedStates"] = rep.composed_states;
            *out_report_json = dup_string(j.dump(2));
        }
        return RMPC_OK;
    });
}

rmpc_status rmpc_trace_replay(const rmpc_term* start, const rmpc_policy* p,
                              const char* script_json, const char* ref_script_json, int* out_ok,
                              char** out_report_json) {
    if (rmpc_status s = require(start && p && script_json && out_ok,
                                "start, policy, script and out_ok must be non-NULL"))
        return s;
    return guarded([&] {
        std::vector<rmpc::ScriptStep> script = rmpc::parse_script(script_json);
        rmpc::ReplayReport rep = rmpc::replay_script(start->value, script, p->value);
        std::optional<bool> ref_equivalent;
        if (ref_script_json) {
            std::vector<rmpc::ScriptStep> ref = rmpc::parse_script(ref_script_json);
            rmpc::ReplayReport ref_rep = rmpc::replay_script(start->value, ref, p->value);
            if (!ref_rep.ok) {
                set_error("reference script failed to replay: " + ref_rep.error);
                return RMPC_ERR_INVALID;
            }
            if (rep.ok)
                ref_equivalent =
                    rmpc::causally_equivalent(rep.computation, ref_rep.computation);
        }
        *out_ok = rep.ok ? 1 : 0;
        if (out_report_json)
            *out_report_json = dup_string(rmpc::replay_report_to_json(rep, ref_equivalent));
        return RMPC_OK;
    });
}

rmpc_status rmpc_bisim_check(const rmpc_term* a, const rmpc_term* b, const rmpc_policy* p,
                             rmpc_bisim_kind kind, size_t depth, int* out_equivalent,
                             char** out_detail_json) {
    if (rmpc_status s =
            require(a && b && p && out_equivalent, "terms, policy and out must be non-NULL"))
        return s;
    if (kind != RMPC_BISIM_MB && kind != RMPC_BISIM_FBMB && kind != RMPC_BISIM_FTABMB)
        return require(false, "unknown bisimilarity kind");
    return guarded([&] {
        size_t use_depth = depth ? depth : rmpc::kDefaultRunDepth;
        rmpc::Ctmc ca = rmpc::build_ctmc(a->value, p->value, rmpc::kDefaultMaxStates);
        rmpc::Ctmc cb = rmpc::build_ctmc(b->value, p->value, rmpc::kDefaultMaxStates);
        rmpc::RatedLts ra = rmpc::RatedLts::from_ctmc(ca);
        rmpc::RatedLts rb = rmpc::RatedLts::from_ctmc(cb);
        bool equivalent = false;
        switch (kind) {
            case RMPC_BISIM_MB:
                equivalent = rmpc::mb_equivalent(ra, rb).equivalent;
                break;
            case RMPC_BISIM_FBMB:
                equivalent = rmpc::fbmb_check(ra, rb, use_depth).equivalent;
                break;
            case RMPC_BISIM_FTABMB:
                equivalent = rmpc::ftabmb_equivalent(ra, rb, use_depth);
                break;
        }
        *out_equivalent = equivalent ? 1 : 0;
        if (out_detail_json) {
            if (kind == RMPC_BISIM_FBMB) {
                rmpc::FbmbResult fr = rmpc::fbmb_check(ra, rb, use_depth);
                nlohmann::json j;
                j["equivalent"] = fr.equivalent;
                if (fr.equivalent)
                    j["checkedDepth"] = fr.depth;
                else
                    j["distinguishedAtDepth"] = fr.depth;
                *out_detail_json = dup_string(j.dump(2));
            } else {
                rmpc::MbResult res = rmpc::mb_equivalent(ra, rb);
                *out_detail_json = dup_string(rmpc::partition_to_json(ra, rb, res));
            }
        }
        return RMPC_OK;
    });
}

}  // extern "C"
