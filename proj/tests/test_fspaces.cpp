#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "fspaces.hpp"
#include "oracles.hpp"

using namespace ahy;

namespace {

GridFunction power(const GridPtr& g, double beta) {
    return sampleFunction(g, [beta](double, double p) { return std::pow(p, beta); }, "rho^b");
}

}  // namespace

TEST_SUITE("fspaces") {
    TEST_CASE("weight spec validation") {
        CHECK_NOTHROW((WeightSpec{2, 2.0, 0.0, 1}.validate()));
        const GridFunction u = sampleFunction(buildGrid(3, 64, Grading::Geometric, 1e-3), [](double, double p) { return p; });
        CHECK_THROWS_AS(weightedSobolevNorm(u, {3, 2.0, 0.0, std::nullopt}), Error);
        CHECK_THROWS_AS((WeightSpec{1, 1.0, 0.0, std::nullopt}.validate()), Error);
        CHECK_THROWS_AS((WeightSpec{1, 2.0, 0.0, 2}.validate()), Error);
        CHECK_THROWS_AS((WeightSpec{-1, 2.0, 0.0, std::nullopt}.validate()), Error);
    }

    TEST_CASE("mobius cover") {
        for (double eps : {1e-2, 1e-4, 1e-6}) {
            const MobiusCover c = MobiusCover::build(eps);
            REQUIRE(c.windows.size() >= 2);
            for (std::size_t i = 1; i < c.windows.size(); ++i) CHECK(c.windows[i].center < c.windows[i - 1].center);
            for (const Window& w : c.windows) {
                if (!w.clipped) {
                    CHECK(w.lo == doctest::Approx(w.center / std::exp(1.0)));
                    CHECK(w.hi == doctest::Approx(w.center * std::exp(1.0)));
                }
            }
            CHECK(c.windows.back().lo <= eps);
            // every point of (eps, rhoStart] is covered
            for (double p = eps * 1.01; p <= c.rhoStart; p *= 1.07) {
                bool covered = false;
                for (const Window& w : c.windows) covered = covered || (w.lo <= p && p <= w.hi);
                CHECK(covered);
            }
            CHECK(c.multiplicity(eps) <= 3);
        }
    }

    TEST_CASE("scaled derivatives of powers") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-4);
        const std::vector<GridFunction> d = scaledDerivatives(power(g, 1.5), 2);
        REQUIRE(d.size() == 3);
        for (std::size_t i = 10; i + 10 < g->size(); i += 50) {
            const double p15 = std::pow(g->rho()[i], 1.5);
            CHECK(d[1].values[i] == doctest::Approx(1.5 * p15).epsilon(1e-3));
            CHECK(d[2].values[i] == doctest::Approx(2.25 * p15).epsilon(1e-3));
        }
        const GridFunction r2 = rhoPowerDerivative(power(g, 2.0), 2);
        for (std::size_t i = 10; i + 10 < g->size(); i += 50)
            CHECK(r2.values[i] == doctest::Approx(2.0 * g->rho()[i] * g->rho()[i]).epsilon(1e-6));
    }

    TEST_CASE("weighted norm identities") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-3);
        CHECK(weightedSobolevNorm(sampleFunction(g, [](double, double) { return 0.0; }), {1, 2.0, 0.0, std::nullopt}) == 0.0);
        // rho^delta with weight delta is the truncated volume^{1/p}
        const double vol = std::sqrt(oracle::weightedIntegral(oracle::hyperbolic(), 3, [](double) { return 1.0; }, 1, 0, 1 - 1e-3));
        CHECK(weightedSobolevNorm(power(g, 0.8), {0, 2.0, 0.8, std::nullopt}) == doctest::Approx(vol).epsilon(2e-3));
    }

    TEST_CASE("scaling identity is exact") {
        const GridPtr g = buildGrid(3, 512, Grading::Geometric, 1e-4);
        const GridFunction u = sampleFunction(g, [](double r, double p) { return p * p * std::sin(2 * r + 0.3); });
        for (double beta : {0.5, 1.25}) {
            const GridFunction v = sampleFunction(g, [beta](double r, double p) { return std::pow(p, beta) * p * p * std::sin(2 * r + 0.3); });
            for (double p : {2.0, 3.5}) {
                const double a = quadratureWeighted(u, p, 0.3), b = quadratureWeighted(v, p, 0.3 + beta);
                CHECK(std::abs(a - b) <= 1e-12 * a);
            }
        }
    }

    TEST_CASE("norm monotonicity") {
        const GridFunction base = sampleFunction(buildGrid(3, 512, Grading::Geometric, 1e-2),
                                                 [](double r, double p) { return p * p * (1 + std::cos(4 * r)); });
        double prev = 0.0;
        for (int k = 0; k <= 2; ++k) {
            const double v = weightedSobolevNorm(base, {k, 2.0, 0.5, std::nullopt});
            CHECK(v >= prev);
            prev = v;
        }
        const WeightSpec w{1, 2.0, 0.5, std::nullopt};
        const DivergenceCheck d = normDivergence(base, {1e-2, 1e-3, 1e-4}, [&](const GridFunction& u) { return weightedSobolevNorm(u, w); });
        // grids differ between truncations, so equality holds only to discretization error
        for (std::size_t i = 1; i < d.values.size(); ++i) CHECK(d.values[i] >= d.values[i - 1] * (1 - 1e-5));
        CHECK_FALSE(d.divergent);
        const DivergenceCheck gs = normDivergence(base, {1e-2, 1e-3, 1e-4}, [&](const GridFunction& u) {
            return gsNorm(u, w, MobiusCover::build(u.grid->eps())).value;
        });
        for (std::size_t i = 1; i < gs.values.size(); ++i) CHECK(gs.values[i] >= gs.values[i - 1] * (1 - 1e-5));
    }

    TEST_CASE("divergence of a slower power") {
        const double delta = 1.0;
        const GridFunction u = power(buildGrid(3, 512, Grading::Geometric, 1e-2), delta - 0.2);
        const DivergenceCheck d = normDivergence(u, {1e-2, 1e-3, 1e-4}, [&](const GridFunction& v) {
            return weightedSobolevNorm(v, {0, 2.0, delta, std::nullopt});
        });
        CHECK(d.divergent);
    }

    TEST_CASE("gs profile of powers is flat, log powers are unbounded") {
        const GridPtr g = buildGrid(3, 2048, Grading::Geometric, 1e-6);
        const MobiusCover cover = MobiusCover::build(g->eps());
        const double delta = 1.2;
        const GsResult flat = gsNorm(power(g, delta), {0, 2.0, delta, std::nullopt}, cover);
        CHECK_FALSE(flat.unbounded);
        double lo = 1e300, hi = 0;
        for (std::size_t i = 0; i < flat.centers.size(); ++i)
            if (!cover.windows[i].interior && !flat.clipped[i]) {
                lo = std::min(lo, flat.profile[i]);
                hi = std::max(hi, flat.profile[i]);
            }
        CHECK(hi <= 1.1 * lo);
        // closed form: window integral of rho^{-delta p} rho^{delta p} over the hyperbolic window volume
        const GsResult logp = gsNorm(sampleFunction(g, [delta](double, double p) { return std::pow(p, delta) * std::log(1 / p); }),
                                     {0, 2.0, delta, std::nullopt}, cover);
        CHECK(logp.unbounded);
        // the profile grows like |log rho_i|
        std::vector<double> x, y;
        for (std::size_t i = 0; i < logp.centers.size(); ++i)
            if (!cover.windows[i].interior && !logp.clipped[i]) {
                x.push_back(std::log(std::log(1 / logp.centers[i])));
                y.push_back(std::log(logp.profile[i]));
            }
        CHECK(oracle::slope(x, y) == doctest::Approx(1.0).epsilon(0.1));
        CHECK(gsNorm(sampleFunction(g, [](double, double) { return 0.0; }), {0, 2.0, 0.0, std::nullopt}, cover).value == 0.0);
    }

    TEST_CASE("gs window value matches the closed-form window integral") {
        // Windows carry the unit-ball measure drho/rho of the Mobius chart, so for u = rho^delta
        // rho_i^{-delta} (int_{c/e}^{ce} rho^{delta p} drho/rho)^{1/p} = ((e^{dp} - e^{-dp}) / (dp))^{1/p}.
        const GridPtr g = buildGrid(3, 2048, Grading::Geometric, 1e-6);
        const MobiusCover cover = MobiusCover::build(g->eps());
        for (double delta : {0.5, 1.0, 2.0})
            for (double p : {2.0, 3.0}) {
                const GsResult r = gsNorm(power(g, delta), {0, p, delta, std::nullopt}, cover);
                const double dp = delta * p;
                const double ref = std::pow((std::exp(dp) - std::exp(-dp)) / dp, 1 / p);
                for (std::size_t i = 0; i < r.centers.size(); ++i)
                    if (!cover.windows[i].clipped) CHECK(r.profile[i] == doctest::Approx(ref).epsilon(2e-3));
            }
    }

    TEST_CASE("inclusion inequality holds with one corpus constant") {
        // W(u; k, p, delta') <= C GS(u; k, p, delta) for delta > delta' + (n-1)/p.
        const double p = 2.0, deltaPrime = 0.0, delta = 1.25;
        REQUIRE(delta > deltaPrime + 2.0 / p);
        const std::vector<std::function<double(double, double)>> corpus{
            [](double, double r) { return std::pow(r, 1.25); },
            [](double, double r) { return std::pow(r, 1.5); },
            [](double, double r) { return r * r; },
            [](double, double r) { return r * r * (1 + r); },
            [](double q, double r) { return std::pow(r, 1.5) * std::cos(3 * q); },
            [](double, double r) { return r * r * r; },
            [](double, double r) { return std::pow(r, 1.25) / (1 + r); },
        };
        double C = 0.0;
        std::vector<double> perEps;
        for (double eps : {1e-2, 1e-3}) {
            const GridPtr g = buildGrid(3, 1024, Grading::Geometric, eps);
            const MobiusCover cover = MobiusCover::build(eps);
            double c = 0.0;
            for (const auto& f : corpus)
                for (int k : {0, 1}) {
                    const GridFunction u = sampleFunction(g, f);
                    c = std::max(c, weightedSobolevNorm(u, {k, p, deltaPrime, std::nullopt}) / gsNorm(u, {k, p, delta, std::nullopt}, cover).value);
                }
            perEps.push_back(c);
            C = std::max(C, c);
        }
        MESSAGE("inclusion constant C = " << C);
        CHECK(C <= 2.5);
        CHECK(perEps[1] <= 1.2 * perEps[0]);
    }

    TEST_CASE("fortified norms") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-3);
        const GridFunction u = sampleFunction(g, [](double r, double p) { return p * (1 + 0.5 * std::cos(r)); });
        const double p = 4.0;
        CHECK(fortifiedNormH(u, {1, p, 0.0, 0}) == weightedSobolevNorm(u, {1, p, -3.0 / p, std::nullopt}));
        const MobiusCover cover = MobiusCover::build(g->eps());
        CHECK(fortifiedNormX(u, {1, p, 0.0, 0}, cover).value == gsNorm(u, {1, p, 0.0, std::nullopt}, cover).value);
        const GridFunction zero = sampleFunction(g, [](double, double) { return 0.0; });
        CHECK(fortifiedNormH(zero, {1, p, 0.0, 1}) == 0.0);
        CHECK(fortifiedNormX(zero, {1, p, 0.0, 1}, cover).value == 0.0);
        CHECK_THROWS_AS(fortifiedNormH(u, {0, p, 0.0, 1}), Error);

        // u = rho, m = 1, p = 4, k = 1: finite and stable under refinement of eps
        const WeightSpec w{1, p, 0.0, 1};
        const DivergenceCheck d = normDivergence(power(g, 1.0), {1e-2, 1e-3, 1e-4}, [&](const GridFunction& v) { return fortifiedNormH(v, w); });
        CHECK_FALSE(d.divergent);
        CHECK(d.values.back() == doctest::Approx(d.values[1]).epsilon(0.05));

        const GridPtr fine = buildGrid(3, 2048, Grading::Geometric, 1e-6);
        const MobiusCover fc = MobiusCover::build(fine->eps());
        CHECK_FALSE(fortifiedNormX(power(fine, 1.0), {1, 2.0, 0.0, 1}, fc).unbounded);
        CHECK(fortifiedNormX(power(fine, 0.7), {1, 2.0, 0.0, 1}, fc).unbounded);
    }

    TEST_CASE("decay exponent fits") {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-5);
        CHECK(decayExponent(sampleFunction(g, [](double, double p) { return std::pow(p, 1.5) * (1 + 0.3 * p); }), 2e-4, 0.05).beta ==
              doctest::Approx(1.5).epsilon(0.05 / 1.5));
        CHECK(std::abs(decayExponent(sampleFunction(g, [](double, double) { return 1.0; }), 2e-4, 0.05).beta) <= 0.01);
        const DecayFit lg = decayExponent(sampleFunction(g, [](double, double p) { return p * p * std::log(p); }), 2e-4, 0.05);
        CHECK(lg.beta >= 1.8);
        CHECK(lg.beta <= 2.0);
        const DecayFit clean = decayExponent(power(g, 2.0), 2e-4, 0.05);
        CHECK(lg.rms > clean.rms);
        CHECK_THROWS_AS(decayExponent(sampleFunction(g, [](double, double) { return 0.0; }), 2e-4, 0.05), Error);
        CHECK_THROWS_AS(decayExponent(power(g, 1.0), 0.1, 0.5), Error);
    }
}
