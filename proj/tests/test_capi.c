/* Exercises the shared library through its C header only. */
#include <ahy/ahy.h>

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;
static int checks = 0;

#define EXPECT(cond)                                                         \
    do {                                                                     \
        ++checks;                                                            \
        if (!(cond)) {                                                       \
            ++failures;                                                      \
            fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
        }                                                                    \
    } while (0)

static void test_status_and_errors(void) {
    EXPECT(strcmp(ahy_status_name(AHY_OK), "ok") == 0);
    EXPECT(strlen(ahy_version()) > 0);
    ahy_metric* m = NULL;
    EXPECT(ahy_metric_create("sphere", 3, NULL, 0, &m) == AHY_ERR_INVALID_ARGUMENT);
    EXPECT(m == NULL);
    EXPECT(strstr(ahy_last_error(), "sphere") != NULL);
    EXPECT(ahy_metric_create("hyperbolic", 3, NULL, 0, NULL) == AHY_ERR_NULL_POINTER);
    double r = 0;
    EXPECT(ahy_indicial_radius(-1.0, 3, &r) == AHY_ERR_PARAMETER_RANGE);
    EXPECT(ahy_indicial_radius(3.0, 3, &r) == AHY_OK);
    EXPECT(r == 2.0);
    EXPECT(strcmp(ahy_last_error(), "") == 0);
}

static void test_geometry(void) {
    ahy_metric* m = NULL;
    ahy_grid* g = NULL;
    ahy_gridfn* R = NULL;
    EXPECT(ahy_metric_create("hyperbolic", 4, NULL, 0, &m) == AHY_OK);
    int n = 0;
    EXPECT(ahy_metric_dimension(m, &n) == AHY_OK && n == 4);
    double defect = 1;
    EXPECT(ahy_metric_ah_defect(m, &defect) == AHY_OK && fabs(defect) < 1e-14);
    EXPECT(ahy_grid_create(4, 1024, 1, 1e-4, &g) == AHY_OK);
    size_t N = 0;
    EXPECT(ahy_grid_size(g, &N) == AHY_OK && N == 1024);
    double small[4];
    EXPECT(ahy_grid_nodes(g, small, small, 4) == AHY_ERR_BUFFER_TOO_SMALL);
    EXPECT(ahy_scalar_curvature(m, g, &R) == AHY_OK);
    double* v = malloc(N * sizeof(double));
    EXPECT(ahy_gridfn_values(R, v, N) == AHY_OK);
    double worst = 0;
    for (size_t i = 0; i < N; ++i) worst = fmax(worst, fabs(v[i] + 12.0));
    EXPECT(worst <= 1e-6);
    free(v);
    ahy_gridfn_destroy(R);
    ahy_grid_destroy(g);
    ahy_metric_destroy(m);
    ahy_metric_destroy(NULL);
}

static void test_norms_and_decay(void) {
    ahy_grid* g = NULL;
    ahy_gridfn* u = NULL;
    EXPECT(ahy_grid_create(3, 1024, 1, 1e-4, &g) == AHY_OK);
    EXPECT(ahy_gridfn_rho_power(g, 2.0, 1.5, &u) == AHY_OK);
    double beta = 0, r2 = 0;
    EXPECT(ahy_decay_exponent(u, 1e-3, 0.1, &beta, &r2) == AHY_OK);
    EXPECT(fabs(beta - 1.5) < 1e-6 && r2 > 0.999999);
    double norm = 0;
    EXPECT(ahy_weighted_sobolev_norm(u, 1, 2.0, 0.5, &norm) == AHY_OK && norm > 0);
    EXPECT(ahy_weighted_sobolev_norm(u, 3, 2.0, 0.5, &norm) == AHY_ERR_PARAMETER_RANGE);
    int unbounded = -1;
    EXPECT(ahy_gs_norm(u, 0, 2.0, 1.5, &norm, &unbounded) == AHY_OK && unbounded == 0);
    ahy_gridfn_destroy(u);
    ahy_grid_destroy(g);
}

static void test_elliptic(void) {
    int in = -1;
    EXPECT(ahy_fredholm_range_x(1.0, 3, 1.0, &in) == AHY_OK && in == 1);
    EXPECT(ahy_fredholm_range_x(2.0, 3, 1.0, &in) == AHY_OK && in == 0);
    EXPECT(ahy_fredholm_range_h(0.5, 2.0, 3, 1.0, &in) == AHY_OK && in == 1);
    EXPECT(ahy_weak_l2_condition(0.5, 2.0, 2, 3, &in) == AHY_OK && in == 0);
    EXPECT(ahy_compatible_indices(1.0, 4.0, 2, 1.0, 2.0, 3, &in) == AHY_OK && in == 1);

    ahy_metric* m = NULL;
    ahy_grid* g = NULL;
    EXPECT(ahy_metric_create("hyperbolic", 3, NULL, 0, &m) == AHY_OK);
    EXPECT(ahy_grid_create(3, 2048, 1, 1e-5, &g) == AHY_OK);
    double dm = 0, dp = 0;
    EXPECT(ahy_homogeneous_exponents(m, g, 3.0, &dm, &dp) == AHY_OK);
    EXPECT(fabs(dm + 1.0) <= 1e-3 && fabs(dp - 3.0) <= 1e-3);

    ahy_gridfn* f = NULL;
    ahy_gridfn* u = NULL;
    EXPECT(ahy_gridfn_rho_power(g, 1.0, 1.0, &f) == AHY_OK);
    EXPECT(ahy_solve_shifted(m, 0.5, f, 0.0, &u) == AHY_OK);
    size_t N = 0;
    ahy_gridfn_size(u, &N);
    double* v = malloc(N * sizeof(double));
    ahy_gridfn_values(u, v, N);
    double lo = 1;
    for (size_t i = 0; i < N; ++i) lo = fmin(lo, v[i]);
    EXPECT(lo >= -1e-12);
    free(v);
    EXPECT(ahy_solve_shifted(m, -1.0, f, 0.0, &u) != AHY_OK);
    ahy_gridfn_destroy(u);
    ahy_gridfn_destroy(f);
    ahy_grid_destroy(g);
    ahy_metric_destroy(m);
}

static void test_yamabe_and_run(void) {
    ahy_metric* m = NULL;
    ahy_config* cfg = NULL;
    ahy_gridfn* theta = NULL;
    char* report = NULL;
    EXPECT(ahy_metric_create("hyperbolic", 3, NULL, 0, &m) == AHY_OK);
    EXPECT(ahy_yamabe_solve(m, NULL, &theta, &report) == AHY_OK);
    EXPECT(report != NULL && strstr(report, "\"verify\"") != NULL);
    size_t N = 0;
    ahy_gridfn_size(theta, &N);
    double* v = malloc(N * sizeof(double));
    ahy_gridfn_values(theta, v, N);
    double dev = 0;
    for (size_t i = 0; i < N; ++i) dev = fmax(dev, fabs(v[i] - 1.0));
    EXPECT(dev <= 1e-8);
    free(v);
    ahy_string_free(report);
    ahy_gridfn_destroy(theta);
    ahy_metric_destroy(m);

    const char* doc = "command = \"yamabe\"\n[metric]\nfamily = \"conformal\"\nn = 3\nparams = [0.1, 2]\n";
    EXPECT(ahy_config_parse(doc, &cfg) == AHY_OK);
    EXPECT(ahy_config_metric(cfg, &m) == AHY_OK);
    EXPECT(ahy_yamabe_solve(m, cfg, NULL, NULL) == AHY_OK);
    ahy_metric_destroy(m);
    char* text = NULL;
    EXPECT(ahy_config_serialize(cfg, &text) == AHY_OK);
    ahy_config* again = NULL;
    EXPECT(ahy_config_parse(text, &again) == AHY_OK);
    char* text2 = NULL;
    ahy_config_serialize(again, &text2);
    EXPECT(strcmp(text, text2) == 0);
    ahy_string_free(text);
    ahy_string_free(text2);
    ahy_config_destroy(again);

    char* problems = NULL;
    EXPECT(ahy_config_set_grid_n(cfg, 8) == AHY_OK);
    EXPECT(ahy_config_validate(cfg, &problems) == AHY_OK);
    EXPECT(problems != NULL && strstr(problems, "grid.N") != NULL);
    ahy_string_free(problems);
    ahy_config_set_grid_n(cfg, 256);
    ahy_config_set_out_dir(cfg, "capi_out");
    int exit_status = -1;
    EXPECT(ahy_run(cfg, 1, &exit_status, &report) == AHY_OK);
    EXPECT(exit_status == 0);
    EXPECT(strstr(report, "\"status\"") != NULL);
    ahy_string_free(report);
    ahy_config_destroy(cfg);

    EXPECT(ahy_config_parse("command = \"yamabe\"\n[metric]\nfamily = \"hyperbolic\"\nn = 2\n", &cfg) == AHY_ERR_CONFIG);
    EXPECT(cfg == NULL);
}

int main(void) {
    test_status_and_errors();
    test_geometry();
    test_norms_and_decay();
    test_elliptic();
    test_yamabe_and_run();
    printf("%d checks, %d failures\n", checks, failures);
    return failures == 0 ? 0 : 1;
}
