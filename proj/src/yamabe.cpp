#include "yamabe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "elliptic.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "yamabe";
constexpr double kTauSkip = 1e-8;
constexpr double kFitHi = 0.05;
constexpr double kOrderTol = 1e-10;
// F(0) below this counts as zero when deciding whether the trivial barrier suffices.
constexpr double kBarrierSlack = 1e-10;
constexpr double kLoweringGate = 1e-8;

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw e.withStage(stage);
    }
}

double fitLo(const GridPtr& grid) { return 2.0 * grid->eps(); }

}  // namespace

void YamabeConfig::validate(int n) const {
    Constants::of(n);
    if (!(alpha > 0.0 && alpha < 1.0)) raise(ErrorCode::ParameterRange, kModule, "barrier exponent alpha must lie in (0, 1)");
    if (!(tol > 0.0)) raise(ErrorCode::ParameterRange, kModule, "tolerance must be positive");
    if (maxIter < 1) raise(ErrorCode::ParameterRange, kModule, "max_iter must be >= 1");
    if (!(lambdaMargin >= 0.0)) raise(ErrorCode::ParameterRange, kModule, "lambda margin must be >= 0");
    if (!(rhoCut > 0.0 && rhoCut <= 1.0)) raise(ErrorCode::ParameterRange, kModule, "rho_cut must lie in (0, 1]");
    if (targetOrder < 1) raise(ErrorCode::ParameterRange, kModule, "target order must be >= 1");
    if (targetOrder >= n) raise(ErrorCode::Obstruction, kModule, "target order must be below n; order n is obstructed");
    if (lambdaOverride && !(*lambdaOverride >= 0.0)) raise(ErrorCode::ParameterRange, kModule, "lambda must be >= 0");
    if (!(residualTarget > 0.0)) raise(ErrorCode::ParameterRange, kModule, "residual target must be positive");
    for (const WeightSpec& w : residualWeights) w.validate();
}

double fitCorrectionCoefficient(const RadialMetric& m, const GridPtr& grid, int k) {
    const Constants c = Constants::of(m.n());
    std::vector<double> xs, ys;
    const double lo = fitLo(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double rho = grid->rho()[i];
        if (rho < lo || rho > kFitHi) continue;
        xs.push_back(rho / kFitHi);
        ys.push_back(std::pow(rho, -k) * (scalarCurvaturePhysicalAt(m, grid->r()[i]) - c.rBreve));
    }
    if (xs.size() < 8) raise(ErrorCode::InsufficientData, kModule, "too few nodes in the coefficient fit window");
    Eigen::MatrixXd A(xs.size(), 4);
    Eigen::VectorXd b(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int j = 0; j < 4; ++j) A(static_cast<Eigen::Index>(i), j) = std::pow(xs[i], j);
        b(static_cast<Eigen::Index>(i)) = ys[i];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    return coef(0);
}

std::optional<double> curvatureDecay(const RadialMetric& m, const GridPtr& grid, double lo, double hi) {
    const double rb = Constants::of(m.n()).rBreve;
    GridFunction d = sampleFunction(grid, [&](double r, double) { return scalarCurvaturePhysicalAt(m, r) - rb; });
    double biggest = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (grid->rho()[i] >= lo && grid->rho()[i] <= hi) biggest = std::max(biggest, std::abs(d.values[i]));
    if (biggest <= 1e-9) return std::nullopt;
    return decayExponent(d, lo, hi).beta;
}

ConditioningStep conditioningStep(const RadialMetric& m, const GridPtr& grid, int k, double rhoCut, RadialMetric& out,
                                  std::optional<ConformalFactor>& factor) {
    const int n = m.n();
    if (k < 1) raise(ErrorCode::ParameterRange, kModule, "correction order k must be >= 1");
    if (k >= n)
        raise(ErrorCode::Obstruction, kModule,
              "order k = n is obstructed: the coefficient 2(k+1)(n-1)(n-k) vanishes");
    ConditioningStep step;
    step.k = k;
    step.tau = fitCorrectionCoefficient(m, grid, k);
    step.coefficient = step.tau / (2.0 * (k + 1) * (n - 1) * (n - k));
    factor.reset();
    out = m;
    if (std::abs(step.tau) <= kTauSkip) {
        step.skipped = true;
        return step;
    }
    double cut = rhoCut;
    for (int tries = 0;; ++tries) {
        if (tries > 40) raise(ErrorCode::Positivity, kModule, "cannot keep the correction factor above 0.1");
        const ConformalFactor f = ConformalFactor::cutoffCorrection(step.coefficient, k, cut);
        double lowest = 1.0;
        for (int s = 0; s <= 4000; ++s) lowest = std::min(lowest, f(s / 4000.0));
        if (lowest > 0.1) {
            factor = f;
            break;
        }
        cut *= 0.5;
    }
    step.rhoCut = cut;
    out = m.withMultiplier(*factor, -2.0, RadialMetric::Target::Both);
    return step;
}

ConditioningResult conditionAtInfinity(const RadialMetric& m, int targetOrder, const GridPtr& grid,
                                       const YamabeConfig& cfg) {
    const int n = m.n();
    if (targetOrder >= n)
        raise(ErrorCode::Obstruction, kModule, "target order must be below n; order n is obstructed");
    if (targetOrder < 1) raise(ErrorCode::ParameterRange, kModule, "target order must be >= 1");
    if (std::abs(ahDefect(m)) > 1e-8)
        raise(ErrorCode::Precondition, kModule, "metric is not asymptotically hyperbolic (|d rho| != 1 at the boundary)");
    const Constants c = Constants::of(n);
    ConditioningResult res{m, {}, {}};
    std::vector<ConformalFactor> factors;
    for (int k = 1; k < targetOrder; ++k) {
        const std::optional<double> pre = curvatureDecay(res.metric, grid, fitLo(grid), kFitHi);
        RadialMetric next = res.metric;
        std::optional<ConformalFactor> f;
        ConditioningStep step = conditioningStep(res.metric, grid, k, cfg.rhoCut, next, f);
        step.preDecay = pre;
        if (f) {
            factors.push_back(*f);
            res.metric = next;
        }
        step.postDecay = curvatureDecay(res.metric, grid, fitLo(grid), kFitHi);
        res.log.push_back(step);
    }
    // Theta_c^{-2} = Theta^{q-2}  =>  Theta = Theta_c^{-(n-2)/2}.
    const double e = -2.0 / (c.q - 2.0);
    res.theta = sampleFunction(
        grid,
        [factors, e](double, double rho) {
            double t = 1.0;
            for (const ConformalFactor& f : factors) t *= std::pow(f(rho), e);
            return t;
        },
        "theta_conditioning");
    return res;
}

DiscreteState discreteState(const RadialMetric& m, const GridPtr& grid) {
    DiscreteState s{RadialLaplacian(m, grid, Measure::Physical), scalarCurvaturePhysical(m, grid).values};
    return s;
}

DiscreteState conformalState(const DiscreteState& s, const std::vector<double>& theta, int n) {
    const Constants c = Constants::of(n);
    const std::vector<double> lapTheta = s.lap.apply(theta);
    std::vector<double> R(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > 0.0)) raise(ErrorCode::Positivity, kModule, "conformal factor must be positive");
        R[i] = (-c.a * lapTheta[i] + s.R[i] * theta[i]) * std::pow(theta[i], 1.0 - c.q);
    }
    return DiscreteState{s.lap.conformallyChanged(theta, c.q), std::move(R)};
}

LoweringResult lowerScalarCurvature(const DiscreteState& s, int n) {
    const Constants c = Constants::of(n);
    const std::size_t N = s.R.size();
    std::vector<double> v0(N, 0.0);
    for (std::size_t i = 0; i + 1 < N; ++i) v0[i] = std::max(s.R[i] - c.rBreve, 0.0);
    LoweringResult out{false, 0.0, 0.0, {}, s};
    out.maxExcess = *std::max_element(v0.begin(), v0.end());
    if (out.maxExcess <= 0.0) {
        out.theta.assign(N, 1.0);
        out.maxExcessAfter = 0.0;
        for (std::size_t i = 0; i + 1 < N; ++i) out.maxExcessAfter = std::max(out.maxExcessAfter, s.R[i] - c.rBreve);
        return out;
    }
    out.applied = true;
    std::vector<double> V(N, 0.0), rhs(N, 0.0);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double left = i == 0 ? v0[1] : v0[i - 1];
        V[i] = std::max(0.25 * (left + 2.0 * v0[i] + v0[i + 1]), v0[i]);
        rhs[i] = -V[i];
    }
    const std::vector<double> u = solveOperator(s.lap, c.a, V, rhs, OuterCondition::dirichlet(0.0));
    out.theta.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.theta[i] = 1.0 + u[i];
    out.state = conformalState(s, out.theta, n);
    out.maxExcessAfter = -1e300;
    for (std::size_t i = 0; i + 1 < N; ++i) out.maxExcessAfter = std::max(out.maxExcessAfter, out.state.R[i] - c.rBreve);
    if (out.maxExcessAfter > kLoweringGate)
        raise(ErrorCode::Precondition, kModule, "scalar curvature still above Rbreve after lowering");
    return out;
}

double yamabeF(double z, double R, const Constants& k) {
    return k.rBreve * std::pow(1.0 + z, k.q - 1.0) - R * (1.0 + z);
}

double yamabeFLambda(double z, double R, double lambda, const Constants& k) {
    return k.rBreve * std::expm1((k.q - 1.0) * std::log1p(z)) + (k.rBreve - R) * (1.0 + z) + (lambda - k.rBreve) * z;
}

BarrierPair buildUpperBarrier(const DiscreteState& s, int n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) raise(ErrorCode::ParameterRange, kModule, "alpha must lie in (0, 1)");
    const Constants c = Constants::of(n);
    const RadialGrid& g = *s.lap.grid();
    const std::size_t N = g.size();
    for (std::size_t i = 0; i + 1 < N; ++i)
        if (s.R[i] - c.rBreve > kLoweringGate)
            raise(ErrorCode::Precondition, kModule,
                  "R[g] exceeds Rbreve; condition at infinity and lower the scalar curvature first");
    std::vector<double> f(N), zero(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) f[i] = alpha * (n - 1 - alpha) * std::pow(g.rho()[i], alpha);
    BarrierPair bp;
    bp.v = solveOperator(s.lap, 1.0, zero, f, OuterCondition::dirichlet(std::pow(g.rhoMin(), alpha)));
    bp.c = 1e300;
    for (std::size_t i = 0; i < N; ++i) {
        if (bp.v[i] < 0.0) raise(ErrorCode::MaximumPrinciple, kModule, "barrier solution v is negative");
        if (i + 1 < N) bp.c = std::min(bp.c, bp.v[i] / std::pow(g.rho()[i], alpha));
    }
    bp.lower.assign(N, 0.0);
    std::vector<double> lapV(N);
    for (std::size_t i = 0; i + 1 < N; ++i) lapV[i] = s.lap.applyAt(bp.v, i);
    auto defect = [&](double K) {
        double worst = -1e300;
        for (std::size_t i = 0; i + 1 < N; ++i)
            worst = std::max(worst, yamabeF(K * bp.v[i], s.R[i], c) + c.a * K * lapV[i]);
        return worst;
    };
    double worstF0 = -1e300;
    for (std::size_t i = 0; i + 1 < N; ++i) worstF0 = std::max(worstF0, yamabeF(0.0, s.R[i], c));
    double K = 0.0;
    if (worstF0 > kBarrierSlack) {
        double hi = 1e-8;
        int doublings = 0;
        while (defect(hi) > 0.0) {
            hi *= 2.0;
            if (++doublings > 200) raise(ErrorCode::MaxIterations, kModule, "no supersolution multiple K found");
        }
        double lo = doublings == 0 ? 0.0 : 0.5 * hi;
        while (hi - lo > 0.01 * hi) {
            const double mid = 0.5 * (lo + hi);
            (defect(mid) > 0.0 ? lo : hi) = mid;
        }
        K = hi;
    }
    bp.K = K;
    bp.supersolutionDefect = defect(K);
    bp.upper.resize(N);
    for (std::size_t i = 0; i < N; ++i) bp.upper[i] = K * bp.v[i];
    return bp;
}

BarrierPair buildUpperBarrier(const RadialMetric& m, const GridPtr& grid, double alpha) {
    return buildUpperBarrier(discreteState(m, grid), m.n(), alpha);
}

double lambdaForMonotonicity(const std::vector<double>& R, const std::vector<double>& upper, int n, double margin) {
    const Constants c = Constants::of(n);
    if (R.size() != upper.size()) raise(ErrorCode::InvalidArgument, kModule, "length mismatch");
    double zmax = 0.0;
    for (double u : upper) {
        if (u < 0.0) raise(ErrorCode::InvalidArgument, kModule, "upper barrier must be nonnegative");
        zmax = std::max(zmax, u);
    }
    double sup = -1e300;
    for (int s = 0; s <= 64; ++s) {
        const double z = zmax * s / 64.0;
        const double growth = -c.rBreve * (c.q - 1.0) * std::pow(1.0 + z, c.q - 2.0);
        for (std::size_t i = 0; i + 1 < R.size(); ++i) sup = std::max(sup, growth + R[i]);
    }
    return (1.0 + margin) * std::max(sup, 0.0);
}

double lambdaForMonotonicity(const RadialMetric& m, const GridPtr& grid, const std::vector<double>& upper,
                             double margin) {
    return lambdaForMonotonicity(scalarCurvaturePhysical(m, grid).values, upper, m.n(), margin);
}

IterationResult monotoneIterate(const DiscreteState& s, int n, double lambda, const BarrierPair& barriers, double tol,
                                int maxIter) {
    const Constants c = Constants::of(n);
    const std::size_t N = s.R.size();
    if (barriers.upper.size() != N) raise(ErrorCode::InvalidArgument, kModule, "barrier length mismatch");
    IterationResult res;
    std::vector<double> u = barriers.upper, rhs(N, 0.0);
    const std::vector<double> V(N, lambda);
    for (int it = 1;; ++it) {
        for (std::size_t i = 0; i + 1 < N; ++i) rhs[i] = yamabeFLambda(u[i], s.R[i], lambda, c);
        std::vector<double> next = solveOperator(s.lap, c.a, V, rhs, OuterCondition::dirichlet(0.0));
        double delta = 0.0;
        IterationRecord rec{0.0, 1e300, -1e300};
        for (std::size_t i = 0; i < N; ++i) {
            if (next[i] > u[i] + kOrderTol || next[i] < barriers.lower[i] - kOrderTol)
                raise(ErrorCode::Monotonicity, kModule,
                      "iterate left the barrier sandwich or increased (check Lambda or the discretization)");
            delta = std::max(delta, std::abs(next[i] - u[i]));
            rec.uMin = std::min(rec.uMin, next[i]);
            rec.uMax = std::max(rec.uMax, next[i]);
        }
        rec.delta = delta;
        if (!res.trace.empty() && res.trace.back().delta > 0.0)
            res.maxContraction = std::max(res.maxContraction, delta / res.trace.back().delta);
        res.trace.push_back(rec);
        u = std::move(next);
        if (delta < tol) break;
        if (it >= maxIter) raise(ErrorCode::MaxIterations, kModule, "monotone iteration did not converge");
    }
    for (std::size_t i = 0; i + 1 < N; ++i)
        res.fixedPointResidual =
            std::max(res.fixedPointResidual, std::abs(-c.a * s.lap.applyAt(u, i) - yamabeF(u[i], s.R[i], c)));
    res.u = std::move(u);
    return res;
}

VerifyReport verifySolution(const RadialMetric& m, const GridFunction& theta, const YamabeConfig& cfg) {
    const int n = m.n();
    const Constants c = Constants::of(n);
    const GridPtr& grid = theta.grid;
    const std::size_t N = grid->size();
    const double rhoFloor = 10.0 * grid->eps();
    VerifyReport out;
    const GridFunction Rc = conformalScalarCurvature(m, theta);
    std::vector<double> omega(N);
    for (std::size_t i = 0; i < N; ++i) omega[i] = grid->rho()[i] * std::pow(theta.values[i], -0.5 * (c.q - 2.0));
    const GridFunction Ro = scalarCurvatureFromOmega(m, makeGridFunction(grid, omega, "omega"));
    GridFunction resid{grid, std::vector<double>(N), "R + n(n-1)", {}};
    for (std::size_t i = 0; i < N; ++i) {
        resid.values[i] = Rc.values[i] - c.rBreve;
        if (i + 1 == N || grid->rho()[i] <= rhoFloor) continue;
        out.residualSup = std::max(out.residualSup, std::abs(Rc.values[i] - c.rBreve));
        out.residualOmegaSup = std::max(out.residualOmegaSup, std::abs(Ro.values[i] - c.rBreve));
        out.formulaGap = std::max(out.formulaGap, std::abs(Rc.values[i] - Ro.values[i]));
    }
    for (const WeightSpec& w : cfg.residualWeights) out.weighted.push_back(weightedSobolevNorm(resid, w));
    GridFunction dev{grid, std::vector<double>(N), "theta - 1", {}};
    double biggest = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        dev.values[i] = theta.values[i] - 1.0;
        if (grid->rho()[i] >= 2.0 * grid->eps() && grid->rho()[i] <= kFitHi)
            biggest = std::max(biggest, std::abs(dev.values[i]));
    }
    if (biggest > 1e-12) {
        try {
            out.thetaDecay = decayExponent(dev, 2.0 * grid->eps(), kFitHi);
        } catch (const Error&) {
            out.thetaDecay.reset();
        }
    }
    out.passed = out.residualSup <= cfg.residualTarget;
    return out;
}

YamabeSolution yamabeSolve(const RadialMetric& m, const YamabeConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = m.n();
    staged("config", [&] { cfg.validate(n); return 0; });
    const Constants c = Constants::of(n);
    const GridPtr grid = staged("grid", [&] { return RadialGrid::build(n, cfg.grid); });
    YamabeReport rep;

    const ConditioningResult cond =
        staged("conditioning", [&] { return conditionAtInfinity(m, cfg.targetOrder, grid, cfg); });
    rep.conditioning = cond.log;
    const DiscreteState s1 = staged("conditioning", [&] { return conformalState(discreteState(m, grid), cond.theta.values, n); });

    const LoweringResult low = staged("lowering", [&] { return lowerScalarCurvature(s1, n); });
    rep.loweringApplied = low.applied;
    rep.loweringExcess = low.maxExcess;
    rep.loweringExcessAfter = low.maxExcessAfter;

    const BarrierPair bp = staged("barrier", [&] { return buildUpperBarrier(low.state, n, cfg.alpha); });
    rep.barrierK = bp.K;
    rep.barrierC = bp.c;
    rep.barrierDefect = bp.supersolutionDefect;

    rep.lambdaRequired = lambdaForMonotonicity(low.state.R, bp.upper, n, 0.0);
    rep.lambda = (1.0 + cfg.lambdaMargin) * rep.lambdaRequired;
    if (cfg.lambdaOverride) {
        if (*cfg.lambdaOverride < rep.lambdaRequired)
            throw Error(ErrorCode::ParameterRange, kModule, "lambda override is below the monotonicity threshold", "lambda");
        rep.lambda = *cfg.lambdaOverride;
    }

    const IterationResult it =
        staged("iteration", [&] { return monotoneIterate(low.state, n, rep.lambda, bp, cfg.tol, cfg.maxIter); });
    rep.iterations = it.trace;
    rep.maxContraction = it.maxContraction;
    rep.fixedPointResidual = it.fixedPointResidual;

    GridFunction theta{grid, std::vector<double>(grid->size()), "theta", {}};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        theta.values[i] = cond.theta.values[i] * low.theta[i] * (1.0 + it.u[i]);
        if (!(theta.values[i] > 0.0))
            throw Error(ErrorCode::Positivity, kModule, "composed conformal factor is not positive", "compose");
    }
    rep.verify = staged("verify", [&] { return verifySolution(m, theta, cfg); });
    rep.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    (void)c;
    return {std::move(theta), std::move(rep)};
}

}  // namespace ahy
