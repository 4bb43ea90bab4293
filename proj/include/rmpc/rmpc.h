/* C interface to the RMPC workbench core.
 *
 * All functions return an rmpc_status; out-parameters are only written on
 * RMPC_OK. On failure rmpc_last_error() describes what went wrong (the
 * message is thread-local and overwritten by the next failing call).
 *
 * Strings returned through char** are heap-allocated; release them with
 * rmpc_string_free. Handles are released with their matching *_free; all
 * *_free functions accept NULL.
 */
#ifndef RMPC_H
#define RMPC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rmpc_status {
    RMPC_OK = 0,
    RMPC_ERR_PARSE = 1,       /* input text could not be parsed */
    RMPC_ERR_ILL_FORMED = 2,  /* term violates key well-formedness */
    RMPC_ERR_INVALID = 3,     /* invalid argument (NULL handle, bad kind, ...) */
    RMPC_ERR_TRUNCATED = 4,   /* state space exceeded the configured bound */
    RMPC_ERR_NOT_ERGODIC = 5, /* chain is not irreducible */
    RMPC_ERR_NUMERIC = 6,     /* linear solve failed or result unusable */
    RMPC_ERR_AUDIT = 7,       /* internal cross-check failed */
    RMPC_ERR_INTERNAL = 8
} rmpc_status;

typedef struct rmpc_term rmpc_term;
typedef struct rmpc_policy rmpc_policy;
typedef struct rmpc_lts rmpc_lts;
typedef struct rmpc_ctmc rmpc_ctmc;

typedef enum rmpc_bisim_kind {
    RMPC_BISIM_MB = 0,     /* forward-only Markovian bisimilarity */
    RMPC_BISIM_FBMB = 1,   /* forward-backward, over runs */
    RMPC_BISIM_FTABMB = 2  /* forward + backward action presence */
} rmpc_bisim_kind;

/* Message for the most recent failing call on this thread; never NULL. */
const char* rmpc_last_error(void);

void rmpc_string_free(char* s);
void rmpc_doubles_free(double* p);

/* --- terms ------------------------------------------------------------- */

/* Parses either a bare term or a full model file ("def"/"system" form). */
rmpc_status rmpc_term_parse(const char* text, rmpc_term** out);
void rmpc_term_free(rmpc_term* t);

rmpc_status rmpc_term_format(const rmpc_term* t, char** out);
/* RMPC_OK when well-formed, RMPC_ERR_ILL_FORMED (with diagnostics in
 * rmpc_last_error) otherwise. */
rmpc_status rmpc_term_check(const rmpc_term* t);
/* Renames keys to 1..m in first-occurrence order. */
rmpc_status rmpc_term_canonical(const rmpc_term* t, rmpc_term** out);
/* *out = 1 when the two terms are equal up to key renaming. */
rmpc_status rmpc_term_key_equivalent(const rmpc_term* a, const rmpc_term* b, int* out);

/* --- backward rate policies -------------------------------------------- */

/* Backward rate = forward rate (the default). */
rmpc_status rmpc_policy_equal(rmpc_policy** out);
/* Parses {"default": 1.0, "a": 0.5, ...}: per-action backward multipliers. */
rmpc_status rmpc_policy_from_json(const char* json_text, rmpc_policy** out);
void rmpc_policy_free(rmpc_policy* p);

/* --- transitions and transition systems -------------------------------- */

/* Enabled forward and backward transitions of one term, as JSON. */
rmpc_status rmpc_term_transitions(const rmpc_term* t, const rmpc_policy* p, char** out_json);

/* Breadth-first exploration up to max_states states (0 = default bound).
 * Fails with RMPC_ERR_TRUNCATED only in rmpc_ctmc_build; here truncation is
 * recorded inside the result. */
rmpc_status rmpc_lts_build(const rmpc_term* t, const rmpc_policy* p, size_t max_states,
                           rmpc_lts** out);
void rmpc_lts_free(rmpc_lts* l);
rmpc_status rmpc_lts_num_states(const rmpc_lts* l, size_t* out);
rmpc_status rmpc_lts_truncated(const rmpc_lts* l, int* out);
rmpc_status rmpc_lts_to_json(const rmpc_lts* l, char** out);
rmpc_status rmpc_lts_to_dot(const rmpc_lts* l, char** out);

/* --- the underlying Markov chain --------------------------------------- */

rmpc_status rmpc_ctmc_build(const rmpc_term* t, const rmpc_policy* p, size_t max_states,
                            rmpc_ctmc** out);
/* Reads a hand-written chain from JSON ({"states": [...], "initial": i,
 * "moves": [{"from","to","direction","action","rate"}, ...]}); the generator
 * is recomputed and validated. */
rmpc_status rmpc_ctmc_parse(const char* json_text, rmpc_ctmc** out);
void rmpc_ctmc_free(rmpc_ctmc* c);
rmpc_status rmpc_ctmc_num_states(const rmpc_ctmc* c, size_t* out);
rmpc_status rmpc_ctmc_to_json(const rmpc_ctmc* c, char** out);
/* Stationary distribution; *out has rmpc_ctmc_num_states entries. */
rmpc_status rmpc_ctmc_steady_state(const rmpc_ctmc* c, double** out, size_t* n);
/* *out_reversible = 1 iff detailed balance holds at tolerance tol
 * (0 = default); the full report (residuals, cycle checks) lands in
 * out_report_json when non-NULL. */
rmpc_status rmpc_ctmc_reversibility(const rmpc_ctmc* c, double tol, size_t cycle_bound,
                                    int* out_reversible, char** out_report_json);

/* Splits a root parallel composition into its two components and checks the
 * product-form criterion: Cartesian composed state space and factorizing
 * steady state. Fails with RMPC_ERR_INVALID when the term's root is not a
 * parallel operator. *out_holds is 1 only when every part of the check
 * passes; the report JSON carries the individual findings. */
rmpc_status rmpc_product_form(const rmpc_term* composed, const rmpc_policy* p, double tol,
                              size_t max_states, int* out_holds, char** out_report_json);

/* --- trace replay ------------------------------------------------------- */

/* Replays a step script ({"steps": [{"direction", "action", "key",
 * optional "rate"}, ...]}) from `start`. A step that matches no enabled
 * transition stops the replay: *out_ok becomes 0 and the report lists the
 * enabled moves at the failure point. ref_script_json may be NULL; when
 * given, it must replay successfully from the same start and the report
 * gains "refCausallyEquivalent", comparing the two computations. */
rmpc_status rmpc_trace_replay(const rmpc_term* start, const rmpc_policy* p,
                              const char* script_json, const char* ref_script_json, int* out_ok,
                              char** out_report_json);

/* --- bisimilarities ----------------------------------------------------- */

/* Compares two terms. depth bounds the run length for FBMB/FTABMB (0 =
 * default); it is ignored for MB. *out_equivalent is 1 or 0; out_detail_json
 * (optional) carries the partition and a distinguishing witness if any. */
rmpc_status rmpc_bisim_check(const rmpc_term* a, const rmpc_term* b, const rmpc_policy* p,
                             rmpc_bisim_kind kind, size_t depth, int* out_equivalent,
                             char** out_detail_json);

#ifdef __cplusplus
}
#endif

#endif /* RMPC_H */
