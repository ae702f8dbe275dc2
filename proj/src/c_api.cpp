#include "ahy/ahy.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "config.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "fspaces.hpp"
#include "geometry.hpp"
#include "run.hpp"
#include "yamabe.hpp"

struct ahy_metric {
    ahy::RadialMetric m;
};
struct ahy_grid {
    ahy::GridPtr g;
};
struct ahy_gridfn {
    ahy::GridFunction f;
};
struct ahy_config {
    ahy::RunConfig c;
};

namespace {

thread_local std::string lastError;

ahy_status fail(ahy_status s, const std::string& msg) {
    lastError = msg;
    return s;
}

// Runs body, translating exceptions to status codes and recording the message.
template <class F>
ahy_status guard(F&& body) {
    try {
        lastError.clear();
        body();
        return AHY_OK;
    } catch (const ahy::Error& e) {
        return fail(static_cast<ahy_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(AHY_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(AHY_ERR_INTERNAL, e.what());
    }
}

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

#define AHY_REQUIRE(ptr) \
    if (!(ptr)) return fail(AHY_ERR_NULL_POINTER, #ptr " must not be null")

// Output handles and strings read as NULL after any failure.
#define AHY_REQUIRE_OUT(ptr) \
    AHY_REQUIRE(ptr);        \
    *(ptr) = nullptr

ahy_gridfn* wrap(ahy::GridFunction f) { return new ahy_gridfn{std::move(f)}; }

}  // namespace

extern "C" {

const char* ahy_last_error(void) { return lastError.c_str(); }

const char* ahy_status_name(ahy_status status) {
    switch (status) {
        case AHY_OK: return "ok";
        case AHY_ERR_NULL_POINTER: return "null-pointer";
        case AHY_ERR_BUFFER_TOO_SMALL: return "buffer-too-small";
        default:
            if (status >= AHY_ERR_INVALID_ARGUMENT && status <= AHY_ERR_INTERNAL)
                return ahy::errorCodeName(static_cast<ahy::ErrorCode>(static_cast<int>(status)));
            return "unknown";
    }
}

const char* ahy_version(void) { return "1.0.0"; }

void ahy_string_free(char* s) { std::free(s); }

ahy_status ahy_metric_create(const char* family, int n, const double* params, size_t nparams, ahy_metric** out) {
    AHY_REQUIRE(family);
    AHY_REQUIRE_OUT(out);
    if (nparams > 0 && !params) return fail(AHY_ERR_NULL_POINTER, "params must not be null when nparams > 0");
    return guard([&] {
        ahy::MetricBlock b;
        b.family = family;
        b.n = n;
        b.params.assign(params, params + nparams);
        *out = new ahy_metric{ahy::buildMetric(b)};
    });
}

void ahy_metric_destroy(ahy_metric* m) { delete m; }

ahy_status ahy_metric_dimension(const ahy_metric* m, int* out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(out);
    *out = m->m.n();
    lastError.clear();
    return AHY_OK;
}

ahy_status ahy_metric_ah_defect(const ahy_metric* m, double* out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::ahDefect(m->m); });
}

ahy_status ahy_metric_curvature_at(const ahy_metric* m, double r, double* out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(out);
    if (!(r >= 0.0 && r < 1.0)) return fail(AHY_ERR_PARAMETER_RANGE, "r must lie in [0, 1)");
    return guard([&] { *out = ahy::scalarCurvaturePhysicalAt(m->m, r); });
}

ahy_status ahy_grid_create(int n, size_t N, int geometric, double eps_trunc, ahy_grid** out) {
    AHY_REQUIRE_OUT(out);
    return guard([&] {
        *out = new ahy_grid{ahy::buildGrid(n, N, geometric ? ahy::Grading::Geometric : ahy::Grading::Uniform, eps_trunc)};
    });
}

void ahy_grid_destroy(ahy_grid* g) { delete g; }

ahy_status ahy_grid_size(const ahy_grid* g, size_t* out) {
    AHY_REQUIRE(g);
    AHY_REQUIRE(out);
    *out = g->g->size();
    lastError.clear();
    return AHY_OK;
}

ahy_status ahy_grid_nodes(const ahy_grid* g, double* r, double* rho, size_t capacity) {
    AHY_REQUIRE(g);
    if (capacity < g->g->size()) return fail(AHY_ERR_BUFFER_TOO_SMALL, "capacity below grid size");
    if (r) std::memcpy(r, g->g->r().data(), g->g->size() * sizeof(double));
    if (rho) std::memcpy(rho, g->g->rho().data(), g->g->size() * sizeof(double));
    lastError.clear();
    return AHY_OK;
}

ahy_status ahy_gridfn_create(const ahy_grid* g, const double* values, size_t count, ahy_gridfn** out) {
    AHY_REQUIRE(g);
    AHY_REQUIRE(values);
    AHY_REQUIRE_OUT(out);
    if (count != g->g->size()) return fail(AHY_ERR_DIMENSION, "value count differs from grid size");
    return guard([&] { *out = wrap(ahy::makeGridFunction(g->g, std::vector<double>(values, values + count))); });
}

ahy_status ahy_gridfn_rho_power(const ahy_grid* g, double c, double beta, ahy_gridfn** out) {
    AHY_REQUIRE(g);
    AHY_REQUIRE_OUT(out);
    return guard([&] {
        *out = wrap(ahy::sampleFunction(g->g, [c, beta](double, double rho) { return c * std::pow(rho, beta); }));
    });
}

void ahy_gridfn_destroy(ahy_gridfn* f) { delete f; }

ahy_status ahy_gridfn_size(const ahy_gridfn* f, size_t* out) {
    AHY_REQUIRE(f);
    AHY_REQUIRE(out);
    *out = f->f.size();
    lastError.clear();
    return AHY_OK;
}

ahy_status ahy_gridfn_values(const ahy_gridfn* f, double* out, size_t capacity) {
    AHY_REQUIRE(f);
    AHY_REQUIRE(out);
    if (capacity < f->f.size()) return fail(AHY_ERR_BUFFER_TOO_SMALL, "capacity below function size");
    std::memcpy(out, f->f.values.data(), f->f.size() * sizeof(double));
    lastError.clear();
    return AHY_OK;
}

ahy_status ahy_scalar_curvature(const ahy_metric* m, const ahy_grid* g, ahy_gridfn** out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(g);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = wrap(ahy::scalarCurvaturePhysical(m->m, g->g)); });
}

ahy_status ahy_laplace_beltrami(const ahy_metric* m, const ahy_gridfn* u, ahy_gridfn** out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(u);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = wrap(ahy::laplaceBeltrami(m->m, u->f)); });
}

ahy_status ahy_conformal_scalar_curvature(const ahy_metric* m, const ahy_gridfn* theta, ahy_gridfn** out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(theta);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = wrap(ahy::conformalScalarCurvature(m->m, theta->f)); });
}

ahy_status ahy_decay_exponent(const ahy_gridfn* u, double lo, double hi, double* beta, double* r2) {
    AHY_REQUIRE(u);
    AHY_REQUIRE(beta);
    return guard([&] {
        const ahy::DecayFit f = ahy::decayExponent(u->f, lo, hi);
        *beta = f.beta;
        if (r2) *r2 = f.r2;
    });
}

ahy_status ahy_weighted_sobolev_norm(const ahy_gridfn* u, int k, double p, double delta, double* out) {
    AHY_REQUIRE(u);
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::weightedSobolevNorm(u->f, ahy::WeightSpec{k, p, delta, std::nullopt}); });
}

ahy_status ahy_gs_norm(const ahy_gridfn* u, int k, double p, double delta, double* out, int* unbounded) {
    AHY_REQUIRE(u);
    AHY_REQUIRE(out);
    return guard([&] {
        const ahy::GsResult r =
            ahy::gsNorm(u->f, ahy::WeightSpec{k, p, delta, std::nullopt}, ahy::MobiusCover::build(u->f.grid->eps()));
        *out = r.value;
        if (unbounded) *unbounded = r.unbounded ? 1 : 0;
    });
}

ahy_status ahy_indicial_radius(double lambda, int n, double* out) {
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::indicialRadius(lambda, n); });
}

ahy_status ahy_fredholm_range_x(double delta, int n, double radius, int* out) {
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::fredholmRangeX(delta, n, radius) ? 1 : 0; });
}

ahy_status ahy_fredholm_range_h(double delta, double q, int n, double radius, int* out) {
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::fredholmRangeH(delta, q, n, radius) ? 1 : 0; });
}

ahy_status ahy_weak_l2_condition(double s, double p, int d, int n, int* out) {
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::weakL2Condition(s, p, d, n) ? 1 : 0; });
}

ahy_status ahy_compatible_indices(double s, double p, int d, double sigma, double q, int n, int* out) {
    AHY_REQUIRE(out);
    return guard([&] { *out = ahy::compatibleIndices(s, p, d, sigma, q, n) ? 1 : 0; });
}

ahy_status ahy_solve_shifted(const ahy_metric* m, double lambda, const ahy_gridfn* f, double dirichlet,
                             ahy_gridfn** out) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(f);
    AHY_REQUIRE_OUT(out);
    return guard([&] {
        *out = wrap(ahy::solveShifted({m->m, lambda, f->f, ahy::OuterCondition::dirichlet(dirichlet)}));
    });
}

ahy_status ahy_homogeneous_exponents(const ahy_metric* m, const ahy_grid* g, double lambda, double* delta_minus,
                                     double* delta_plus) {
    AHY_REQUIRE(m);
    AHY_REQUIRE(g);
    AHY_REQUIRE(delta_minus);
    AHY_REQUIRE(delta_plus);
    return guard([&] {
        const ahy::ExponentPair e = ahy::homogeneousExponents(m->m, g->g, lambda);
        *delta_minus = e.deltaMinus;
        *delta_plus = e.deltaPlus;
    });
}

ahy_status ahy_config_parse(const char* text, ahy_config** out) {
    AHY_REQUIRE(text);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = new ahy_config{ahy::parseConfig(text)}; });
}

ahy_status ahy_config_default(const char* command, ahy_config** out) {
    AHY_REQUIRE(command);
    AHY_REQUIRE_OUT(out);
    return guard([&] {
        ahy::RunConfig c;
        c.command = command;
        *out = new ahy_config{c};
    });
}

void ahy_config_destroy(ahy_config* c) { delete c; }

ahy_status ahy_config_serialize(const ahy_config* c, char** out) {
    AHY_REQUIRE(c);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = duplicate(ahy::serializeConfig(c->c)); });
}

ahy_status ahy_config_validate(const ahy_config* c, char** problems) {
    AHY_REQUIRE(c);
    AHY_REQUIRE_OUT(problems);
    return guard([&] {
        std::string all;
        for (const std::string& p : ahy::validateConfig(c->c)) all += p + "\n";
        *problems = duplicate(all);
    });
}

ahy_status ahy_config_set_command(ahy_config* c, const char* command) {
    AHY_REQUIRE(c);
    AHY_REQUIRE(command);
    return guard([&] { c->c.command = command; });
}

ahy_status ahy_config_set_grid_n(ahy_config* c, size_t N) {
    AHY_REQUIRE(c);
    return guard([&] { c->c.grid.N = N; });
}

ahy_status ahy_config_set_seed(ahy_config* c, uint64_t seed) {
    AHY_REQUIRE(c);
    return guard([&] { c->c.seed = seed; });
}

ahy_status ahy_config_set_out_dir(ahy_config* c, const char* dir) {
    AHY_REQUIRE(c);
    AHY_REQUIRE(dir);
    return guard([&] { c->c.output.dir = dir; });
}

ahy_status ahy_config_metric(const ahy_config* c, ahy_metric** out) {
    AHY_REQUIRE(c);
    AHY_REQUIRE_OUT(out);
    return guard([&] { *out = new ahy_metric{ahy::buildMetric(c->c.metric)}; });
}

ahy_status ahy_yamabe_solve(const ahy_metric* m, const ahy_config* cfg, ahy_gridfn** theta, char** report_json) {
    if (theta) *theta = nullptr;
    if (report_json) *report_json = nullptr;
    AHY_REQUIRE(m);
    return guard([&] {
        ahy::RunConfig rc = cfg ? cfg->c : ahy::RunConfig{};
        ahy::YamabeConfig yc = rc.yamabe;
        yc.grid = rc.grid;
        yc.residualWeights = rc.weights;
        const ahy::YamabeSolution sol = ahy::yamabeSolve(m->m, yc);
        const std::string rep = report_json ? ahy::dumpJson(ahy::yamabeReportJson(sol, yc, m->m.n(), rc.output.timing)) : "";
        if (theta) *theta = wrap(sol.theta);
        if (report_json) *report_json = duplicate(rep);
    });
}

ahy_status ahy_run(const ahy_config* c, int quiet, int* exit_status, char** report_json) {
    if (report_json) *report_json = nullptr;
    AHY_REQUIRE(c);
    AHY_REQUIRE(exit_status);
    return guard([&] {
        const ahy::RunOutcome r = ahy::runCommand(c->c, quiet != 0);
        *exit_status = r.exitStatus;
        if (report_json) *report_json = duplicate(ahy::dumpJson(r.report));
        if (r.exitStatus != 0 && r.report.contains("error")) lastError = r.report["error"]["message"].get<std::string>();
    });
}

}  // extern "C"
