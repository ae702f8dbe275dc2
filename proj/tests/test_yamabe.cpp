#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "geometry.hpp"
#include "yamabe.hpp"

using namespace ahy;

namespace {

YamabeConfig config(std::size_t N, int targetOrder = 1) {
    YamabeConfig cfg;
    cfg.grid.N = N;
    cfg.targetOrder = targetOrder;
    return cfg;
}

double supDiff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// sup |Theta phi - 1| for the round-trip input phi^{q-2} g_hyp
double roundTripError(std::size_t N) {
    const ConformalFactor phi = ConformalFactor::power(0.1, 2, 1.0);
    const YamabeSolution s = yamabeSolve(conformalChangeMetric(RadialMetric::hyperbolicBall(3), phi), config(N));
    double dev = 0.0;
    for (std::size_t i = 0; i < s.theta.size(); ++i)
        dev = std::max(dev, std::abs(s.theta.values[i] * phi(s.theta.grid->rho()[i]) - 1.0));
    return dev;
}

// 4-point Lagrange interpolation in r onto the nodes of another grid
std::vector<double> interpolate(const GridFunction& u, const RadialGrid& to) {
    const std::vector<double>& r = u.grid->r();
    std::vector<double> out;
    for (double x : to.r()) {
        std::size_t j = std::upper_bound(r.begin(), r.end(), x) - r.begin();
        j = std::clamp<std::size_t>(j, 2, r.size() - 2) - 2;
        double v = 0.0;
        for (std::size_t a = j; a < j + 4; ++a) {
            double w = 1.0;
            for (std::size_t b = j; b < j + 4; ++b)
                if (b != a) w *= (x - r[b]) / (r[a] - r[b]);
            v += w * u.values[a];
        }
        out.push_back(v);
    }
    return out;
}

std::vector<RadialMetric> ahFamilies() {
    return {RadialMetric::hyperbolicBall(3),           RadialMetric::hyperbolicBall(4),
            RadialMetric::flat(3),                     RadialMetric::conformalHyperbolic(3, 0.1, 1),
            RadialMetric::conformalHyperbolic(4, 0.2, 2), RadialMetric::perturbedHyperbolic(3, 0.3, 1),
            RadialMetric::perturbedHyperbolic(4, 0.3, 2)};
}

}  // namespace

TEST_SUITE("yamabe") {
    TEST_CASE("constants and config validation") {
        const Constants c = Constants::of(3);
        CHECK(c.q == 6.0);
        CHECK(c.a == 8.0);
        CHECK(c.rBreve == -6.0);
        CHECK(Constants::of(4).q == 4.0);
        CHECK_THROWS_AS(Constants::of(2), Error);
        YamabeConfig cfg;
        CHECK_NOTHROW(cfg.validate(3));
        cfg.alpha = 1.0;
        CHECK_THROWS_AS(cfg.validate(3), Error);
        cfg = YamabeConfig{};
        cfg.targetOrder = 3;
        CHECK_THROWS_AS(cfg.validate(3), Error);
    }

    TEST_CASE("lambda for monotonicity") {
        const std::vector<double> R(64, -6.0), zero(64, 0.0);
        CHECK(lambdaForMonotonicity(R, zero, 3) == doctest::Approx(26.4).epsilon(1e-12));
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        CHECK(lambdaForMonotonicity(RadialMetric::hyperbolicBall(3), g, std::vector<double>(512, 0.0)) ==
              doctest::Approx(26.4).epsilon(1e-9));

        const Constants k = Constants::of(3);
        const std::vector<double> Rs{-6.0, -6.5, -8.0, -6.01};
        std::vector<double> upper{0.3, 0.1, 0.0, 0.05};
        const double lambda = lambdaForMonotonicity(Rs, upper, 3);
        // F_Lambda nondecreasing on [0, max u+] at each node; the last node is excluded as Dirichlet
        for (std::size_t i = 0; i + 1 < Rs.size(); ++i) {
            double prev = -1e300;
            for (int s = 0; s <= 64; ++s) {
                const double z = 0.3 * s / 64.0;
                const double v = yamabeFLambda(z, Rs[i], lambda, k);
                CHECK(v >= prev - 1e-12);
                CHECK(v == doctest::Approx(yamabeF(z, Rs[i], k) + lambda * z).epsilon(1e-10));
                prev = v;
            }
        }
        // sup over a larger set
        double last = lambda;
        for (int d = 0; d < 5; ++d) {
            for (double& u : upper) u *= 2.0;
            const double next = lambdaForMonotonicity(Rs, upper, 3);
            CHECK(next >= last);
            last = next;
        }
        upper[0] = -1.0;
        CHECK_THROWS_AS(lambdaForMonotonicity(Rs, upper, 3), Error);
    }

    TEST_CASE("barrier") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-4);
        const BarrierPair hyp = buildUpperBarrier(RadialMetric::hyperbolicBall(3), g, 0.5);
        CHECK(hyp.K == 0.0);
        for (double u : hyp.upper) CHECK(u == 0.0);
        CHECK(hyp.c > 0.0);

        // conditioned, lowered perturbed metric
        const RadialMetric m = RadialMetric::perturbedHyperbolic(3, 0.3, 1);
        const YamabeConfig cfg = config(1024, 2);
        const ConditioningResult cond = conditionAtInfinity(m, 2, g, cfg);
        const DiscreteState s = conformalState(discreteState(m, g), cond.theta.values, 3);
        const LoweringResult low = lowerScalarCurvature(s, 3);
        const Constants c = Constants::of(3);
        for (std::size_t i = 0; i + 1 < g->size(); ++i) CHECK(low.state.R[i] <= c.rBreve + 1e-8);
        const BarrierPair bp = buildUpperBarrier(low.state, 3, 0.5);
        CHECK(bp.K > 0.0);
        CHECK(bp.c > 0.0);
        double worst = -1e300;
        for (std::size_t i = 0; i + 1 < g->size(); ++i) {
            CHECK(bp.v[i] >= 0.0);
            CHECK(bp.upper[i] >= bp.lower[i]);
            const double u = bp.upper[i];
            worst = std::max(worst, yamabeF(u, low.state.R[i], c) + c.a * low.state.lap.applyAt(bp.upper, i));
            CHECK(bp.v[i] >= bp.c * std::pow(g->rho()[i], 0.5) * (1 - 1e-12));
        }
        // supersolution: a_n (-Lap) u+ >= F(u+)
        CHECK(worst <= 1e-12);
        // K is minimal up to the 1% bisection tolerance
        std::vector<double> smaller(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) smaller[i] = 0.98 * bp.upper[i];
        double worstSmaller = -1e300;
        for (std::size_t i = 0; i + 1 < g->size(); ++i)
            worstSmaller = std::max(worstSmaller, yamabeF(smaller[i], low.state.R[i], c) +
                                                      c.a * low.state.lap.applyAt(smaller, i));
        CHECK(worstSmaller > 0.0);

        // unconditioned input with R above Rbreve is refused
        const DiscreteState raw = discreteState(RadialMetric::conformalHyperbolic(3, 0.1, 1), g);
        CHECK_THROWS_AS(buildUpperBarrier(raw, 3, 0.5), Error);
        CHECK_THROWS_AS(buildUpperBarrier(RadialMetric::hyperbolicBall(3), g, 1.2), Error);
    }

    TEST_CASE("conditioning at infinity") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-4);
        const YamabeConfig cfg = config(1024, 2);
        const ConditioningResult hyp = conditionAtInfinity(RadialMetric::hyperbolicBall(3), 2, g, cfg);
        for (double t : hyp.theta.values) CHECK(t == 1.0);
        for (const ConditioningStep& s : hyp.log) CHECK(s.skipped);

        for (const RadialMetric& m : {RadialMetric::conformalHyperbolic(3, 0.1, 1), RadialMetric::perturbedHyperbolic(3, 0.3, 1)}) {
            const ConditioningResult r = conditionAtInfinity(m, 2, g, cfg);
            REQUIRE(r.log.size() == 1);
            const ConditioningStep& s = r.log[0];
            CHECK(s.k == 1);
            CHECK(s.coefficient == doctest::Approx(s.tau / 16.0));
            REQUIRE(s.preDecay);
            REQUIRE(s.postDecay);
            CHECK(*s.preDecay == doctest::Approx(1.0).epsilon(0.02));
            CHECK(*s.postDecay >= 1.9);
            CHECK(*s.postDecay - *s.preDecay >= 0.9);
            const std::optional<double> post = curvatureDecay(r.metric, g, 2e-4, 0.05);
            REQUIRE(post);
            CHECK(*post >= 1.9);
            // the accumulated factor is positive and tends to 1 at the boundary
            for (double t : r.theta.values) CHECK(t > 0.0);
            CHECK(std::abs(r.theta.values.back() - 1.0) < 1e-3);
        }
        // tau matches the pointwise quotient rho^{-1}(R - Rbreve) deep in the collar
        const RadialMetric m = RadialMetric::conformalHyperbolic(3, 0.1, 1);
        const double tau = fitCorrectionCoefficient(m, g, 1);
        const double direct = (scalarCurvaturePhysicalAt(m, rOfRho(1e-3)) + 6.0) / 1e-3;
        CHECK(tau == doctest::Approx(direct).epsilon(1e-2));
    }

    TEST_CASE("obstruction at order n") {
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        const RadialMetric m = RadialMetric::conformalHyperbolic(3, 0.1, 1);
        RadialMetric out = m;
        std::optional<ConformalFactor> f;
        try {
            conditioningStep(m, g, 3, 0.2, out, f);
            FAIL("no obstruction raised");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Obstruction);
        }
        CHECK_THROWS_AS(conditionAtInfinity(m, 3, g, config(512)), Error);
        YamabeConfig cfg = config(512);
        cfg.targetOrder = 3;
        CHECK_THROWS_AS(yamabeSolve(m, cfg), Error);
    }

    TEST_CASE("hyperbolic fixed point") {
        for (int n : {3, 4}) {
            const YamabeSolution s = yamabeSolve(RadialMetric::hyperbolicBall(n), config(1024));
            double dev = 0.0;
            for (double t : s.theta.values) dev = std::max(dev, std::abs(t - 1.0));
            CHECK(dev <= 1e-8);
            CHECK(s.report.barrierK <= 1e-10);
            CHECK(s.report.iterations.size() == 1);
            CHECK(s.report.verify.passed);
            CHECK(s.report.verify.residualSup <= 1e-8);
        }
    }

    TEST_CASE("monotone iteration invariants on every family") {
        for (const RadialMetric& m : ahFamilies()) {
            const YamabeSolution s = yamabeSolve(m, config(512));
            const YamabeReport& r = s.report;
            INFO("family n=", m.n(), " iterations=", r.iterations.size());
            REQUIRE(!r.iterations.empty());
            for (std::size_t k = 0; k < r.iterations.size(); ++k) {
                CHECK(r.iterations[k].delta >= 0.0);
                CHECK(r.iterations[k].uMin >= -1e-10);
                if (k > 0) CHECK(r.iterations[k].uMax <= r.iterations[k - 1].uMax + 1e-10);
            }
            if (r.iterations.size() > 1) {
                CHECK(r.maxContraction < 1.0);
                for (std::size_t k = 1; k < r.iterations.size(); ++k)
                    if (r.iterations[k - 1].delta > 0.0) CHECK(r.iterations[k].delta < r.iterations[k - 1].delta);
            }
            CHECK(r.lambda >= r.lambdaRequired);
            CHECK(r.fixedPointResidual <= 10.0 * YamabeConfig{}.tol * r.lambda);
            CHECK(r.verify.passed);
            for (double t : s.theta.values) CHECK(t > 0.0);
        }
    }

    TEST_CASE("too small a shift breaks the ordering") {
        // the flat ball needs Lambda ~ 230; a plain iteration with Lambda = 0 overshoots
        const RadialMetric m = RadialMetric::flat(3);
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        const DiscreteState s = discreteState(m, g);
        const LoweringResult low = lowerScalarCurvature(s, 3);
        const BarrierPair bp = buildUpperBarrier(low.state, 3, 0.5);
        try {
            monotoneIterate(low.state, 3, 0.0, bp, 1e-10, 200);
            FAIL("ordering violation not detected");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Monotonicity);
        }
        YamabeConfig cfg = config(512);
        cfg.lambdaOverride = 1.0;
        CHECK_THROWS_AS(yamabeSolve(m, cfg), Error);
    }

    TEST_CASE("conformal round trip") {
        const double e1 = roundTripError(256), e2 = roundTripError(512), e3 = roundTripError(1024);
        MESSAGE("round trip errors ", e1, " ", e2, " ", e3);
        CHECK(e3 <= 1e-4);
        CHECK(std::log2(e1 / e2) >= 1.8);
        CHECK(std::log2(e2 / e3) >= 1.8);
    }

    TEST_CASE("uniqueness") {
        const RadialMetric m = RadialMetric::perturbedHyperbolic(3, 0.3, 1);
        const std::size_t N = 1024;
        const double h = 1.0 / (N - 1);
        const double tolU = 5.0 * std::max(YamabeConfig{}.tol, h * h);
        const YamabeSolution base = yamabeSolve(m, config(N));

        YamabeConfig bigLambda = config(N);
        bigLambda.lambdaOverride = 3.0 * base.report.lambdaRequired;
        const YamabeSolution a = yamabeSolve(m, bigLambda);
        CHECK(supDiff(a.theta.values, base.theta.values) <= tolU);

        const YamabeSolution fine = yamabeSolve(m, config(2 * N));
        CHECK(supDiff(interpolate(fine.theta, *base.theta.grid), base.theta.values) <= tolU);

        const YamabeSolution conditioned = yamabeSolve(m, config(N, 2));
        REQUIRE(conditioned.report.conditioning.size() == 1);
        CHECK_FALSE(conditioned.report.conditioning[0].skipped);
        CHECK(supDiff(conditioned.theta.values, base.theta.values) <= tolU);
    }

    TEST_CASE("verification flags a wrong factor") {
        const RadialMetric m = RadialMetric::perturbedHyperbolic(3, 0.3, 1);
        const YamabeConfig cfg = config(512);
        YamabeSolution s = yamabeSolve(m, cfg);
        CHECK(s.report.verify.passed);
        GridFunction wrong = s.theta;
        for (double& t : wrong.values) t *= 1.01;
        const VerifyReport v = verifySolution(m, wrong, cfg);
        CHECK_FALSE(v.passed);
        // scaling the metric by 1.01^{q-2} scales R by 1.01^{-4}
        CHECK(v.residualSup == doctest::Approx(6.0 * (1.0 - std::pow(1.01, -4.0))).epsilon(1e-3));
    }

    TEST_CASE("perturbed metric self-convergence") {
        // a = a_hyp (1 + 0.05 rho^3 (1 - rho))
        const RadialMetric m = RadialMetric::perturbedHyperbolic(3, 0.05, 3);
        std::vector<double> omega;
        for (std::size_t N : {512, 1024, 2048}) {
            const YamabeSolution s = yamabeSolve(m, config(N));
            CHECK(s.report.verify.passed);
            omega.push_back(s.report.verify.residualOmegaSup);
            if (s.report.verify.thetaDecay) CHECK(s.report.verify.thetaDecay->beta >= 2.9);
        }
        CHECK(std::log2(omega[0] / omega[1]) >= 1.8);
        CHECK(std::log2(omega[1] / omega[2]) >= 1.8);
    }
}
