/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the ssrelay library. All objects are opaque handles owned by
 * the caller and released with the matching *_free function. Functions return
 * an ssr_status; on failure ssr_last_error() describes the problem for the
 * calling thread until the next call on that thread.
 */
#ifndef SSRELAY_H
#define SSRELAY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SSRELAY_BUILDING)
#    define SSR_API __declspec(dllexport)
#  else
#    define SSR_API __declspec(dllimport)
#  endif
#else
#  define SSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssr_status {
    SSR_OK = 0,
    SSR_INVALID_ARGUMENT = 1, /* null handle or out-of-range index */
    SSR_CONFIG = 2,           /* malformed or invalid configuration */
    SSR_IO = 3,               /* file could not be read or written */
    SSR_DOMAIN = 4,           /* numeric argument outside a formula's domain */
    SSR_INTERNAL = 5
} ssr_status;

typedef struct ssr_config ssr_config;
typedef struct ssr_solution ssr_solution;

typedef struct ssr_lookup_row {
    double rho_p;
    double rho_s;
    double p_s;     /* watts */
    double prev_pd;
    double prev_ic; /* watts */
    double opt_pd;
    double opt_ic;  /* watts */
    double value;
} ssr_lookup_row;

SSR_API const char* ssr_version(void);
SSR_API const char* ssr_last_error(void);

/* Configuration */
SSR_API ssr_status ssr_config_parse(const char* json_text, ssr_config** out);
SSR_API ssr_status ssr_config_load(const char* path, ssr_config** out);
SSR_API void ssr_config_free(ssr_config* cfg);
SSR_API ssr_status ssr_config_set_seed(ssr_config* cfg, uint64_t seed);
SSR_API uint64_t ssr_config_seed(const ssr_config* cfg);
/* Resolved document with every default filled in; owned by cfg. */
SSR_API const char* ssr_config_resolved_json(const ssr_config* cfg);
/* Hash of the resolved document without the seed, 16 hex digits; owned by cfg. */
SSR_API const char* ssr_config_hash(const ssr_config* cfg);
/* SSR_OK when the model inputs satisfy every constraint, SSR_CONFIG otherwise
 * with the violated constraints in ssr_last_error(). */
SSR_API ssr_status ssr_validate(const ssr_config* cfg);

/* Optimal control. threads == 0 uses the hardware concurrency. */
SSR_API ssr_status ssr_solve(const ssr_config* cfg, unsigned threads, ssr_solution** out);
SSR_API void ssr_solution_free(ssr_solution* sol);
SSR_API size_t ssr_solution_iterations(const ssr_solution* sol);
SSR_API double ssr_solution_residual(const ssr_solution* sol);
SSR_API int ssr_solution_converged(const ssr_solution* sol);
SSR_API size_t ssr_solution_state_count(const ssr_solution* sol);
SSR_API double ssr_solution_wall_seconds(const ssr_solution* sol);
SSR_API ssr_status ssr_solution_lookup(const ssr_solution* sol, size_t state, ssr_lookup_row* row);
SSR_API ssr_status ssr_solution_write_table(const ssr_solution* sol, const char* path);
SSR_API ssr_status ssr_solution_write_manifest(const ssr_solution* sol, const char* path);

/* Figure data. *all_converged is set to 0 when any solve hit max_iters. */
SSR_API ssr_status ssr_sweep(const ssr_config* cfg, unsigned threads, const char* path,
                             int* all_converged);

/* Monte-Carlo comparison. *all_within is set to 0 when any check failed. */
SSR_API ssr_status ssr_simulate(const ssr_config* cfg, unsigned threads, const char* path,
                                int* all_within);

#ifdef __cplusplus
}
#endif

#endif /* SSRELAY_H */
