#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "metric.hpp"
#include "oracles.hpp"

using namespace ahy;

namespace {

double maxAbsDiff(const std::vector<double>& a, const std::vector<double>& b, std::size_t skipTail = 1) {
    double m = 0;
    for (std::size_t i = 0; i + skipTail < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_SUITE("metric") {
    TEST_CASE("defining function and constants") {
        CHECK(rhoOfR(0.0) == 1.0);
        CHECK(rhoOfR(1.0) == 0.0);
        CHECK(rOfRho(rhoOfR(0.37)) == doctest::Approx(0.37).epsilon(1e-14));
        const Jet j = rhoJet(0.4);
        const double h = 1e-5;
        CHECK(j.d1 == doctest::Approx((rhoOfR(0.4 + h) - rhoOfR(0.4 - h)) / (2 * h)).epsilon(1e-8));
        const Constants c = Constants::of(3);
        CHECK(c.q == 6.0);
        CHECK(c.a == 8.0);
        CHECK(c.rBreve == -6.0);
        CHECK_THROWS_AS(criticalExponent(2), Error);
    }

    TEST_CASE("hyperbolic coefficients") {
        const RadialMetric m = RadialMetric::hyperbolicBall(3);
        CHECK(m.sample(0.0).a.v == doctest::Approx(4.0));
        CHECK(m.sample(1.0).a.v == doctest::Approx(1.0));
        CHECK(ahDefect(m) == 0.0);
    }

    TEST_CASE("ah defect of scaled and flat metrics") {
        const RadialMetric scaled = RadialMetric::hyperbolicBall(3).withMultiplier(ConformalFactor::constant(1.21), 1.0);
        CHECK(ahDefect(scaled) == doctest::Approx(0.21).epsilon(1e-14));
        CHECK(ahDefect(RadialMetric::flat(3, 1.0)) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(ahDefect(RadialMetric::flat(3, 2.0)) == doctest::Approx(1.0));
    }

    TEST_CASE("conformal change of the metric") {
        const RadialMetric h = RadialMetric::hyperbolicBall(3);
        const RadialMetric same = conformalChangeMetric(h, ConformalFactor::constant(1.0));
        for (double r : {0.0, 0.3, 0.9}) CHECK(same.sample(r).a.v == doctest::Approx(h.sample(r).a.v).epsilon(1e-15));
        CHECK(ahDefect(conformalChangeMetric(h, ConformalFactor::power(0.1, 2, 1.0))) == doctest::Approx(0.0));
        CHECK(ahDefect(conformalChangeMetric(h, ConformalFactor::constant(1.1))) ==
              doctest::Approx(std::pow(1.1, 4) - 1).epsilon(1e-13));
        CHECK_THROWS_AS(conformalChangeMetric(RadialMetric::hyperbolicBall(2), ConformalFactor::constant(1.1)), Error);
    }

    TEST_CASE("coefficient jets agree with the hyper-dual oracle") {
        struct Case {
            RadialMetric m;
            oracle::Coeffs c;
        };
        const Case cases[] = {
            {RadialMetric::hyperbolicBall(3), oracle::hyperbolic()},
            {RadialMetric::conformalHyperbolic(3, 0.1, 2), oracle::conformal(3, 0.1, 2, 1.0)},
            {RadialMetric::perturbedHyperbolic(4, 0.05, 3, -0.1, 2), oracle::perturbed(0.05, 3, -0.1, 2)},
        };
        for (const Case& k : cases)
            for (double r : {0.1, 0.5, 0.95}) {
                const MetricSample s = k.m.sample(r);
                const oracle::HD a = k.c.a(oracle::HD::variable(r)), b = k.c.b(oracle::HD::variable(r));
                CHECK(s.a.v == doctest::Approx(a.v).epsilon(1e-13));
                CHECK(s.a.d1 == doctest::Approx(a.d1).epsilon(1e-12));
                CHECK(s.a.d2 == doctest::Approx(a.d12).epsilon(1e-11));
                CHECK(s.b.d2 == doctest::Approx(b.d12).epsilon(1e-11));
            }
    }
}

TEST_SUITE("geometry") {
    TEST_CASE("compactified curvature of the ball model is the round-sphere value") {
        for (int n : {3, 4, 5})
            for (double r : {0.0, 0.2, 0.7, 1.0})
                CHECK(scalarCurvatureCompactified(RadialMetric::hyperbolicBall(n), r) == doctest::Approx(n * (n - 1.0)).epsilon(1e-11));
        CHECK(scalarCurvatureCompactified(RadialMetric::flat(3), 0.4) == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("compactified curvature matches the arclength oracle") {
        const RadialMetric m = RadialMetric::conformalHyperbolic(4, 0.1, 2);
        const RadialMetric p = RadialMetric::perturbedHyperbolic(3, 0.05, 3, 0.02, 2);
        for (double r : {0.2, 0.5, 0.8}) {
            CHECK(scalarCurvatureCompactified(m, r) == doctest::Approx(oracle::compactifiedCurvature(oracle::conformal(4, 0.1, 2, 1.0), r, 4)).epsilon(1e-10));
            CHECK(scalarCurvatureCompactified(p, r) == doctest::Approx(oracle::compactifiedCurvature(oracle::perturbed(0.05, 3, 0.02, 2), r, 3)).epsilon(1e-10));
        }
    }

    TEST_CASE("physical curvature matches the direct warped-product oracle") {
        struct Case {
            RadialMetric m;
            oracle::Coeffs c;
            int n;
        };
        const Case cases[] = {
            {RadialMetric::hyperbolicBall(3), oracle::hyperbolic(), 3},
            {RadialMetric::flat(3, 2.0), oracle::flat(2.0), 3},
            {RadialMetric::conformalHyperbolic(3, 0.1, 1), oracle::conformal(3, 0.1, 1, 1.0), 3},
            {RadialMetric::conformalHyperbolic(5, -0.2, 2, 0.5), oracle::conformal(5, -0.2, 2, 0.5), 5},
            {RadialMetric::perturbedHyperbolic(4, 0.05, 3, 0.1, 1), oracle::perturbed(0.05, 3, 0.1, 1), 4},
        };
        for (const Case& k : cases)
            for (double r : {0.1, 0.5, 0.9, 0.99}) {
                const double ref = oracle::physicalCurvature(k.c, r, k.n);
                CHECK(scalarCurvaturePhysicalAt(k.m, r) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
            }
    }

    TEST_CASE("hyperbolic identity on the grid") {
        for (int n : {3, 4, 5}) {
            const GridPtr g = buildGrid(n, 512, Grading::Geometric, 1e-4);
            const GridFunction R = scalarCurvaturePhysical(RadialMetric::hyperbolicBall(n), g);
            for (double v : R.values) CHECK(v == doctest::Approx(-n * (n - 1.0)).epsilon(1e-9));
        }
    }

    TEST_CASE("flat ball at scale 2 is not asymptotically hyperbolic") {
        const RadialMetric m = RadialMetric::flat(3, 2.0);
        // R[g] + 6 tends to 6 - 6/2 = 3 at the boundary, so the decay exponent is ~0.
        const double near = scalarCurvaturePhysicalAt(m, oracle::rOfRho(1e-4)) + 6.0;
        const double mid = scalarCurvaturePhysicalAt(m, oracle::rOfRho(1e-2)) + 6.0;
        CHECK(std::abs(near) > 1.0);
        CHECK(std::log(std::abs(mid / near)) / std::log(100.0) == doctest::Approx(0.0).epsilon(0.02));
    }

    TEST_CASE("conformal formula trivial cases") {
        const RadialMetric h = RadialMetric::hyperbolicBall(3);
        const GridPtr g = buildGrid(3, 256, Grading::Geometric, 1e-4);
        const GridFunction one = conformalScalarCurvature(h, ConformalFactor::constant(1.0), g);
        const GridFunction R = scalarCurvaturePhysical(h, g);
        CHECK(maxAbsDiff(one.values, R.values) <= 1e-12);
        const GridFunction lam = conformalScalarCurvature(h, ConformalFactor::constant(1.3), g);
        for (std::size_t i = 0; i + 1 < g->size(); ++i) CHECK(lam.values[i] == doctest::Approx(R.values[i] * std::pow(1.3, -4)).epsilon(1e-10));
        GridFunction bad = sampleFunction(g, [](double, double) { return 1.0; });
        bad.values[5] = -1.0;
        CHECK_THROWS_AS(conformalScalarCurvature(h, bad), Error);
    }

    TEST_CASE("omega formula reduces to the physical and compactified curvatures") {
        const RadialMetric m = RadialMetric::conformalHyperbolic(3, 0.1, 2);
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-4);
        const GridFunction byRho = scalarCurvatureFromOmega(m, sampleFunction(g, [](double, double p) { return p; }));
        const GridFunction R = scalarCurvaturePhysical(m, g);
        CHECK(maxAbsDiff(byRho.values, R.values) <= 2e-3);
        const GridFunction byOne = scalarCurvatureFromOmega(m, sampleFunction(g, [](double, double) { return 1.0; }));
        for (std::size_t i = 0; i + 1 < g->size(); i += 97)
            CHECK(byOne.values[i] == doctest::Approx(scalarCurvatureCompactified(m, g->r()[i])).epsilon(1e-9));
    }

    TEST_CASE("cross-formula consistency converges at second order") {
        const RadialMetric h = RadialMetric::hyperbolicBall(3);
        const ConformalFactor th = ConformalFactor::power(0.1, 2, 1.0);
        const RadialMetric changed = conformalChangeMetric(h, th);
        std::vector<double> err;
        for (std::size_t N : {512, 1024, 2048}) {
            const GridPtr g = buildGrid(3, N, Grading::Geometric, 1e-4);
            const GridFunction a = conformalScalarCurvature(h, th, g);
            const GridFunction b = scalarCurvaturePhysical(changed, g);
            err.push_back(maxAbsDiff(a.values, b.values));
        }
        CHECK(oracle::order(err[0], err[1]) >= 1.8);
        CHECK(oracle::order(err[1], err[2]) >= 1.8);
    }

    TEST_CASE("omega formula with a conformal omega matches the changed metric") {
        // omega = rho Theta^{-(q-2)/2} gives omega^{-2} gbar = Theta^{q-2} g.
        const RadialMetric h = RadialMetric::hyperbolicBall(3);
        const ConformalFactor th = ConformalFactor::power(0.1, 2, 1.0);
        const RadialMetric changed = conformalChangeMetric(h, th);
        std::vector<double> err;
        for (std::size_t N : {512, 1024}) {
            const GridPtr g = buildGrid(3, N, Grading::Geometric, 1e-4);
            const GridFunction w = sampleFunction(g, [th](double, double p) { return p / std::pow(th(p), 2.0); });
            err.push_back(maxAbsDiff(scalarCurvatureFromOmega(h, w).values, scalarCurvaturePhysical(changed, g).values));
        }
        CHECK(err[1] < err[0] / 3.0);
        CHECK(err[1] < 1e-3);
    }
}

TEST_SUITE("grid") {
    TEST_CASE("uniform grid endpoints and spacing") {
        const GridPtr g = buildGrid(3, 64, Grading::Uniform, 1e-3);
        CHECK(g->r()[63] == doctest::Approx(0.999).epsilon(1e-15));
        CHECK(g->r()[0] == 0.0);
        const GridPtr g2 = buildGrid(3, 127, Grading::Uniform, 1e-3);
        double h1 = 0, h2 = 0;
        for (std::size_t i = 1; i < g->size(); ++i) h1 = std::max(h1, g->r()[i] - g->r()[i - 1]);
        for (std::size_t i = 1; i < g2->size(); ++i) h2 = std::max(h2, g2->r()[i] - g2->r()[i - 1]);
        CHECK(h1 / h2 == doctest::Approx(2.0).epsilon(1e-9));
    }

    TEST_CASE("geometric tail has constant rho ratios") {
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        REQUIRE(g->tailStart() < g->size() - 10);
        const double q = g->tailRatio();
        for (std::size_t i = g->tailStart() + 1; i + 1 < g->size(); ++i)
            CHECK(g->rho()[i] / g->rho()[i - 1] == doctest::Approx(q).epsilon(1e-12));
        CHECK(q == doctest::Approx(kDefaultTailRatio).epsilon(1e-12));
        // coarser truncations stay graded instead of falling back to uniform
        for (double eps : {1e-2, 1e-3}) {
            const GridPtr c = buildGrid(3, 512, Grading::Geometric, eps);
            CHECK(c->tailStart() < c->size());
            CHECK(c->rho()[c->size() - 1] / c->rho()[c->size() - 2] > 0.9);
        }
    }

    TEST_CASE("grid parameter errors") {
        CHECK_THROWS_AS(buildGrid(3, 8, Grading::Uniform, 1e-3), Error);
        CHECK_THROWS_AS(buildGrid(3, 64, Grading::Uniform, 0.0), Error);
        CHECK_THROWS_AS(buildGrid(3, 64, Grading::Geometric, 1e-3, 1.5), Error);
    }

    TEST_CASE("derivative stencils") {
        const GridPtr g = buildGrid(3, 256, Grading::Geometric, 1e-4);
        const GridFunction sq = sampleFunction(g, [](double r, double) { return r * r; });
        const GridFunction d = differentiate(sq, 1);
        for (std::size_t i = 1; i + 1 < g->size(); ++i) CHECK(d.values[i] == doctest::Approx(2 * g->r()[i]).epsilon(1e-9));
        const GridPtr gu = buildGrid(3, 256, Grading::Uniform, 1e-3);
        const GridFunction c = differentiate(sampleFunction(gu, [](double, double) { return 3.0; }), 2);
        for (double v : c.values) CHECK(std::abs(v) <= 1e-9);
        std::vector<double> err;
        for (std::size_t N : {128, 256, 512}) {
            const GridPtr gg = buildGrid(3, N, Grading::Uniform, 1e-3);
            const GridFunction u = sampleFunction(gg, [](double r, double) { return std::sin(r); });
            const GridFunction du = differentiate(u, 1);
            double e = 0;
            for (std::size_t i = 0; i < gg->size(); ++i) e = std::max(e, std::abs(du.values[i] - std::cos(gg->r()[i])));
            err.push_back(e);
        }
        CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
        CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.15));
    }

    TEST_CASE("laplacian of constants vanishes") {
        const GridPtr g = buildGrid(4, 256, Grading::Geometric, 1e-4);
        const GridFunction l = laplaceBeltrami(RadialMetric::hyperbolicBall(4), sampleFunction(g, [](double, double) { return 1.0; }));
        for (double v : l.values) CHECK(std::abs(v) <= 1e-9);
    }

    TEST_CASE("power-law identity on the hyperbolic ball") {
        // -Lap rho^alpha = -alpha rho^{alpha+1} Lap_bar rho + alpha(n-1-alpha) rho^alpha |d rho|^2
        for (int n : {3, 4})
            for (double alpha : {0.5, 1.0, 2.0}) {
                const RadialMetric m = RadialMetric::hyperbolicBall(n);
                std::vector<double> err;
                for (std::size_t N : {512, 1024}) {
                    const GridPtr g = buildGrid(n, N, Grading::Geometric, 1e-4);
                    const GridFunction u = sampleFunction(g, [alpha](double, double p) { return std::pow(p, alpha); });
                    const GridFunction l = laplaceBeltrami(m, u);
                    double e = 0;
                    for (std::size_t i = 0; i + 1 < g->size(); ++i) {
                        const double r = g->r()[i], p = g->rho()[i];
                        const double ref = -alpha * std::pow(p, alpha + 1) * laplacianBarRho(m, r) +
                                           alpha * (n - 1 - alpha) * std::pow(p, alpha) * gradRhoSquared(m, r);
                        e = std::max(e, std::abs(-l.values[i] - ref));
                    }
                    err.push_back(e);
                }
                CHECK(oracle::order(err[0], err[1]) >= 1.8);
            }
    }

    TEST_CASE("laplacian agrees with the divergence-form oracle") {
        const RadialMetric m = RadialMetric::perturbedHyperbolic(3, 0.05, 3);
        const oracle::Coeffs c = oracle::perturbed(0.05, 3);
        auto w = [](oracle::HD r) { const oracle::HD p = oracle::rho(r); return p * (oracle::HD(1.0) - p); };
        std::vector<double> err;
        for (std::size_t N : {512, 1024}) {
            const GridPtr g = buildGrid(3, N, Grading::Geometric, 1e-4);
            const GridFunction u = sampleFunction(g, [](double, double p) { return p * (1 - p); });
            const GridFunction l = laplaceBeltrami(m, u);
            double e = 0;
            for (std::size_t i = 1; i + 1 < g->size(); ++i) e = std::max(e, std::abs(l.values[i] - oracle::physicalLaplacian(c, w, g->r()[i], 3)));
            err.push_back(e);
        }
        CHECK(oracle::order(err[0], err[1]) >= 1.8);
    }

    TEST_CASE("weighted quadrature") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-3);
        CHECK(quadratureWeighted(sampleFunction(g, [](double, double) { return 0.0; }), 2, 0) == 0.0);
        // rho^delta with weight delta integrates the truncated volume
        const double vol = quadratureWeighted(sampleFunction(g, [](double, double) { return 1.0; }), 2, 0);
        const double same = quadratureWeighted(sampleFunction(g, [](double, double p) { return std::pow(p, 1.5); }), 2, 1.5);
        CHECK(same == doctest::Approx(vol).epsilon(1e-12));
        // u = rho against adaptive quadrature of the exact measure
        const double ref = oracle::weightedIntegral(oracle::hyperbolic(), 3, [](double r) { return oracle::rho(r); }, 2, 0, 1 - 1e-3);
        const double got = quadratureWeighted(sampleFunction(g, [](double, double p) { return p; }), 2, 0);
        CHECK(got == doctest::Approx(ref).epsilon(1e-4));
        CHECK_THROWS_AS(quadratureWeighted(sampleFunction(g, [](double, double p) { return p; }), 0.5, 0), Error);
    }

    TEST_CASE("weighted quadrature scaling identity") {
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        const GridFunction u = sampleFunction(g, [](double r, double p) { return std::cos(3 * r) * p; });
        for (double beta : {0.5, 1.0, 2.25}) {
            const GridFunction v = sampleFunction(g, [beta](double r, double p) { return std::pow(p, beta) * std::cos(3 * r) * p; });
            const double a = quadratureWeighted(u, 3, 0.7), b = quadratureWeighted(v, 3, 0.7 + beta);
            CHECK(std::abs(a - b) <= 1e-12 * a);
        }
    }
}
