#ifndef AHY_AHY_H
#define AHY_AHY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AHY_API __declspec(dllexport)
#else
#define AHY_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. AHY_OK is zero; every other value names a failure class. */
typedef enum ahy_status {
    AHY_OK = 0,
    AHY_ERR_INVALID_ARGUMENT = 1,
    AHY_ERR_DIMENSION = 2,
    AHY_ERR_PARAMETER_RANGE = 3,
    AHY_ERR_METRIC_DEGENERACY = 4,
    AHY_ERR_CRITICAL_EXPONENT = 5,
    AHY_ERR_POSITIVITY = 6,
    AHY_ERR_SINGULAR_SYSTEM = 7,
    AHY_ERR_INSUFFICIENT_DATA = 8,
    AHY_ERR_FIT_QUALITY = 9,
    AHY_ERR_OBSTRUCTION = 10,
    AHY_ERR_PRECONDITION = 11,
    AHY_ERR_MAXIMUM_PRINCIPLE = 12,
    AHY_ERR_MONOTONICITY = 13,
    AHY_ERR_MAX_ITERATIONS = 14,
    AHY_ERR_DOMAIN_EXHAUSTION = 15,
    AHY_ERR_CONFIG = 16,
    AHY_ERR_IO = 17,
    AHY_ERR_INTERNAL = 18,
    AHY_ERR_NULL_POINTER = 19,
    AHY_ERR_BUFFER_TOO_SMALL = 20
} ahy_status;

typedef struct ahy_metric ahy_metric;
typedef struct ahy_grid ahy_grid;
typedef struct ahy_gridfn ahy_gridfn;
typedef struct ahy_config ahy_config;

/* Message of the last failure on the calling thread ("" after success). Valid until the next call. */
AHY_API const char* ahy_last_error(void);
AHY_API const char* ahy_status_name(ahy_status status);
AHY_API const char* ahy_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
AHY_API void ahy_string_free(char* s);

/* ---- metrics ----
 * family: "hyperbolic" ([] or [scale]), "flat" ([scale]), "conformal" ([c, k] or [c, k, sigma]),
 * "perturbed" ([alpha, j] or [alpha, j, beta, l]). */
AHY_API ahy_status ahy_metric_create(const char* family, int n, const double* params, size_t nparams, ahy_metric** out);
AHY_API void ahy_metric_destroy(ahy_metric* m);
AHY_API ahy_status ahy_metric_dimension(const ahy_metric* m, int* out);
/* a(1) - 1; zero for asymptotically hyperbolic metrics. */
AHY_API ahy_status ahy_metric_ah_defect(const ahy_metric* m, double* out);
/* Physical scalar curvature at radius r in [0, 1). */
AHY_API ahy_status ahy_metric_curvature_at(const ahy_metric* m, double r, double* out);

/* ---- grids ---- */
AHY_API ahy_status ahy_grid_create(int n, size_t N, int geometric, double eps_trunc, ahy_grid** out);
AHY_API void ahy_grid_destroy(ahy_grid* g);
AHY_API ahy_status ahy_grid_size(const ahy_grid* g, size_t* out);
/* Either output may be NULL; capacity counts doubles per array. */
AHY_API ahy_status ahy_grid_nodes(const ahy_grid* g, double* r, double* rho, size_t capacity);

/* ---- grid functions ---- */
AHY_API ahy_status ahy_gridfn_create(const ahy_grid* g, const double* values, size_t count, ahy_gridfn** out);
/* c * rho^beta, keeping the analytic form. */
AHY_API ahy_status ahy_gridfn_rho_power(const ahy_grid* g, double c, double beta, ahy_gridfn** out);
AHY_API void ahy_gridfn_destroy(ahy_gridfn* f);
AHY_API ahy_status ahy_gridfn_size(const ahy_gridfn* f, size_t* out);
AHY_API ahy_status ahy_gridfn_values(const ahy_gridfn* f, double* out, size_t capacity);

/* ---- geometry ---- */
AHY_API ahy_status ahy_scalar_curvature(const ahy_metric* m, const ahy_grid* g, ahy_gridfn** out);
AHY_API ahy_status ahy_laplace_beltrami(const ahy_metric* m, const ahy_gridfn* u, ahy_gridfn** out);
/* Curvature of Theta^{q-2} g from the conformal transformation formula. */
AHY_API ahy_status ahy_conformal_scalar_curvature(const ahy_metric* m, const ahy_gridfn* theta, ahy_gridfn** out);

/* ---- function spaces ---- */
AHY_API ahy_status ahy_decay_exponent(const ahy_gridfn* u, double lo, double hi, double* beta, double* r2);
/* m < 0 means no fortification. */
AHY_API ahy_status ahy_weighted_sobolev_norm(const ahy_gridfn* u, int k, double p, double delta, double* out);
AHY_API ahy_status ahy_gs_norm(const ahy_gridfn* u, int k, double p, double delta, double* out, int* unbounded);

/* ---- elliptic ---- */
AHY_API ahy_status ahy_indicial_radius(double lambda, int n, double* out);
AHY_API ahy_status ahy_fredholm_range_x(double delta, int n, double radius, int* out);
AHY_API ahy_status ahy_fredholm_range_h(double delta, double q, int n, double radius, int* out);
AHY_API ahy_status ahy_weak_l2_condition(double s, double p, int d, int n, int* out);
AHY_API ahy_status ahy_compatible_indices(double s, double p, int d, double sigma, double q, int n, int* out);
/* (-Lap + lambda) u = f with u = dirichlet at the truncation node. */
AHY_API ahy_status ahy_solve_shifted(const ahy_metric* m, double lambda, const ahy_gridfn* f, double dirichlet,
                                     ahy_gridfn** out);
AHY_API ahy_status ahy_homogeneous_exponents(const ahy_metric* m, const ahy_grid* g, double lambda,
                                             double* delta_minus, double* delta_plus);

/* ---- configuration and runs ---- */
AHY_API ahy_status ahy_config_parse(const char* text, ahy_config** out);
AHY_API ahy_status ahy_config_default(const char* command, ahy_config** out);
AHY_API void ahy_config_destroy(ahy_config* c);
AHY_API ahy_status ahy_config_serialize(const ahy_config* c, char** out);
/* Newline-separated validation problems, empty when valid. */
AHY_API ahy_status ahy_config_validate(const ahy_config* c, char** problems);
AHY_API ahy_status ahy_config_set_command(ahy_config* c, const char* command);
AHY_API ahy_status ahy_config_set_grid_n(ahy_config* c, size_t N);
AHY_API ahy_status ahy_config_set_seed(ahy_config* c, uint64_t seed);
AHY_API ahy_status ahy_config_set_out_dir(ahy_config* c, const char* dir);
AHY_API ahy_status ahy_config_metric(const ahy_config* c, ahy_metric** out);

/* Yamabe pipeline with the grid and yamabe blocks of cfg (NULL for defaults).
 * theta and report_json may each be NULL. */
AHY_API ahy_status ahy_yamabe_solve(const ahy_metric* m, const ahy_config* cfg, ahy_gridfn** theta, char** report_json);

/* Runs the configured subcommand and writes its artifacts. exit_status: 0 ok, 1 checks failed,
 * 2 runtime error, 3 config error, 4 io error. The return value is AHY_OK whenever the run itself executed. */
AHY_API ahy_status ahy_run(const ahy_config* c, int quiet, int* exit_status, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
