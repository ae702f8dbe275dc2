#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "elliptic.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "mollify.hpp"
#include "run.hpp"
#include "yamabe.hpp"

namespace ahy {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

SelftestCheck guarded(const std::string& name, const std::function<SelftestCheck()>& body) {
    try {
        SelftestCheck c = body();
        c.name = name;
        return c;
    } catch (const std::exception& e) {
        return {name, false, std::string("threw: ") + e.what()};
    }
}

}  // namespace

std::vector<SelftestCheck> runSelftest(std::uint64_t seed) {
    std::vector<SelftestCheck> out;
    const RadialMetric hyp3 = RadialMetric::hyperbolicBall(3);
    const GridPtr g512 = buildGrid(3, 512, Grading::Geometric, 1e-4);

    out.push_back(guarded("geometry.hyperbolic_curvature", [&] {
        double err = 0.0;
        for (int n : {3, 4, 5}) {
            const GridFunction R = scalarCurvaturePhysical(RadialMetric::hyperbolicBall(n), buildGrid(n, 256, Grading::Geometric, 1e-4));
            for (double v : R.values) err = std::max(err, std::abs(v + n * (n - 1.0)));
        }
        return SelftestCheck{"", err <= 1e-6, "max |R + n(n-1)| = " + num(err)};
    }));

    out.push_back(guarded("geometry.ah_predicate", [&] {
        const double d0 = ahDefect(hyp3), d1 = ahDefect(RadialMetric::flat(3, 2.0));
        return SelftestCheck{"", std::abs(d0) <= 1e-12 && d1 > 0.5, "hyperbolic " + num(d0) + ", flat(2) " + num(d1)};
    }));

    out.push_back(guarded("grid.conformal_covariance", [&] {
        // The conformally changed operator agrees with the operator built from the changed metric's cell data.
        const ConformalFactor phi = ConformalFactor::power(0.1, 2, 1.0);
        const GridFunction th = sampleFunction(g512, [phi](double, double rho) { return phi(rho); });
        const RadialLaplacian base(hyp3, g512);
        const RadialLaplacian changed = base.conformallyChanged(th.values, criticalExponent(3));
        const GridFunction u = sampleFunction(g512, [](double r, double) { return std::cos(r); });
        const std::vector<double> a = changed.apply(u.values);
        const std::vector<double> b = RadialLaplacian(conformalChangeMetric(hyp3, phi), g512).apply(u.values);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i + 1 < a.size(); ++i) {
            err = std::max(err, std::abs(a[i] - b[i]));
            scale = std::max(scale, std::abs(b[i]));
        }
        return SelftestCheck{"", err <= 1e-3 * scale, "relative gap " + num(err / scale)};
    }));

    out.push_back(guarded("fspaces.scaling_identity", [&] {
        const GridFunction u = sampleFunction(g512, [](double, double rho) { return rho * rho * (1.0 + rho); });
        GridFunction v = u;
        for (double& x : v.values) x *= -3.5;
        const WeightSpec w{1, 2.0, 0.5, std::nullopt};
        const double a = weightedSobolevNorm(u, w), b = weightedSobolevNorm(v, w);
        const double rel = std::abs(b - 3.5 * a) / (3.5 * a);
        return SelftestCheck{"", rel <= 1e-12, "relative " + num(rel)};
    }));

    out.push_back(guarded("fspaces.decay_exponent", [&] {
        const GridFunction u = sampleFunction(g512, [](double, double rho) { return std::pow(rho, 1.5); });
        const DecayFit f = decayExponent(u, 2e-4, 0.05);
        return SelftestCheck{"", std::abs(f.beta - 1.5) <= 1e-3, "beta " + num(f.beta)};
    }));

    out.push_back(guarded("elliptic.fredholm_windows", [&] {
        bool ok = true;
        for (int n : {3, 4, 5}) {
            const double R0 = indicialRadius(0.0, n), Rn = indicialRadius(n, n);
            ok = ok && !fredholmRangeX(0.0, n, R0) && fredholmRangeX(0.5, n, R0) && fredholmRangeX(n - 1.5, n, R0) &&
                 !fredholmRangeX(n - 1.0, n, R0);
            ok = ok && !fredholmRangeX(-1.0, n, Rn) && fredholmRangeX(-0.5, n, Rn) && !fredholmRangeX(n, n, Rn);
        }
        return SelftestCheck{"", ok, "n = 3, 4, 5"};
    }));

    out.push_back(guarded("elliptic.indicial_exponents", [&] {
        const GridPtr g = buildGrid(3, 1024, Grading::Geometric, 1e-5);
        const ExponentPair e0 = homogeneousExponents(hyp3, g, 0.0);
        const ExponentPair e3 = homogeneousExponents(hyp3, g, 3.0);
        const double err = std::max({std::abs(e0.deltaMinus), std::abs(e0.deltaPlus - 2.0), std::abs(e3.deltaMinus + 1.0),
                                     std::abs(e3.deltaPlus - 3.0)});
        return SelftestCheck{"", err <= 5e-3, "max error " + num(err)};
    }));

    out.push_back(guarded("elliptic.maximum_principle", [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const GridPtr g = buildGrid(3, 256, Grading::Geometric, 1e-4);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> f(g->size());
            for (double& x : f) x = unif(rng) < 0.3 ? 0.0 : unif(rng);
            const GridFunction u =
                solveShifted({hyp3, trial % 2 ? 3.0 : 0.5, makeGridFunction(g, f), OuterCondition::dirichlet(0.0)});
            for (double v : u.values) worst = std::min(worst, v);
        }
        return SelftestCheck{"", worst >= -1e-12, "min solution " + num(worst)};
    }));

    out.push_back(guarded("yamabe.hyperbolic_fixed_point", [&] {
        YamabeConfig cfg;
        cfg.grid.N = 512;
        const YamabeSolution s = yamabeSolve(hyp3, cfg);
        double dev = 0.0;
        for (double t : s.theta.values) dev = std::max(dev, std::abs(t - 1.0));
        return SelftestCheck{"", dev <= 1e-8 && s.report.verify.passed, "sup |theta - 1| = " + num(dev)};
    }));

    out.push_back(guarded("yamabe.obstruction", [&] {
        RadialMetric outM = hyp3;
        std::optional<ConformalFactor> f;
        try {
            conditioningStep(RadialMetric::conformalHyperbolic(3, 0.1, 1), g512, 3, 0.2, outM, f);
        } catch (const Error& e) {
            return SelftestCheck{"", e.code() == ErrorCode::Obstruction, errorCodeName(e.code())};
        }
        return SelftestCheck{"", false, "no error raised"};
    }));

    out.push_back(guarded("yamabe.conformal_round_trip", [&] {
        const ConformalFactor phi = ConformalFactor::power(0.1, 2, 1.0);
        YamabeConfig cfg;
        cfg.grid.N = 512;
        const YamabeSolution s = yamabeSolve(conformalChangeMetric(hyp3, phi), cfg);
        double dev = 0.0;
        for (std::size_t i = 0; i < s.theta.size(); ++i)
            dev = std::max(dev, std::abs(s.theta.values[i] * phi(s.theta.grid->rho()[i]) - 1.0));
        return SelftestCheck{"", dev <= 1e-4, "sup |theta phi - 1| = " + num(dev)};
    }));

    out.push_back(guarded("mollify.constant_preservation", [&] {
        const Kernel psi(24);
        const HalfSpaceField u = HalfSpaceField::sample(2 * M_PI, 64, 1e-2, 1.0, 41, [](double, double) { return 2.0; });
        const HalfSpaceField c = hConvolve(u, psi);
        double err = 0.0;
        for (double v : c.values()) err = std::max(err, std::abs(v - 2.0));
        return SelftestCheck{"", err <= 1e-10, "max error " + num(err)};
    }));

    out.push_back(guarded("mollify.group_law", [&] {
        const HPoint a{0.3, 1.7}, b{-1.2, 0.4}, c{2.0, 0.9};
        const HPoint l = groupMul(groupMul(a, b), c), r = groupMul(a, groupMul(b, c));
        const HPoint e = groupMul(a, groupInv(a));
        const double err = std::max({std::abs(l.x - r.x), std::abs(l.y - r.y), std::abs(e.x), std::abs(e.y - 1.0)});
        const double d = std::abs(hyperbolicDistance(groupMul(c, a), groupMul(c, b)) - hyperbolicDistance(a, b));
        return SelftestCheck{"", err <= 1e-14 && d <= 1e-12, "associativity " + num(err) + ", isometry " + num(d)};
    }));

    out.push_back(guarded("config.round_trip", [&] {
        const RunConfig a = parseConfig(
            "command = \"yamabe\"\n[metric]\nfamily = \"conformal\"\nn = 3\nparams = [0.1, 2]\n[grid]\nN = 256\n");
        const RunConfig b = parseConfig(serializeConfig(a));
        return SelftestCheck{"", a == b, "serialize(parse(doc)) parses equal"};
    }));

    return out;
}

}  // namespace ahy
