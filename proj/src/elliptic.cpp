#include "elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>

#include "errors.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "elliptic";

struct Tridiag {
    std::vector<double> lo, di, up, rhs;
};

Tridiag assemble(const RadialLaplacian& lap, double c, const std::vector<double>& V, const std::vector<double>& f,
                 const OuterCondition& outer) {
    const std::size_t N = lap.mass().size();
    if (V.size() != N || f.size() != N) raise(ErrorCode::InvalidArgument, kModule, "operator data length mismatch");
    const std::vector<double>& M = lap.mass();
    const std::vector<double>& K = lap.conductance();
    Tridiag t{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), f};
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double km = i > 0 ? K[i - 1] : 0.0;
        t.lo[i] = -c * km / M[i];
        t.up[i] = -c * K[i] / M[i];
        t.di[i] = c * (km + K[i]) / M[i] + V[i];
    }
    const RadialGrid& g = *lap.grid();
    if (outer.kind == OuterCondition::Kind::Dirichlet) {
        t.di[N - 1] = 1.0;
        t.rhs[N - 1] = outer.value;
    } else {
        t.di[N - 1] = 1.0;
        t.lo[N - 1] = -std::pow(g.rho()[N - 1] / g.rho()[N - 2], outer.beta);
        t.rhs[N - 1] = 0.0;
    }
    return t;
}

}  // namespace

std::vector<double> solveOperator(const RadialLaplacian& lap, double diffusion, const std::vector<double>& potential,
                                  const std::vector<double>& rhs, const OuterCondition& outer) {
    for (double v : rhs)
        if (!std::isfinite(v)) raise(ErrorCode::InvalidArgument, kModule, "right-hand side is not finite");
    Tridiag t = assemble(lap, diffusion, potential, rhs, outer);
    const std::size_t N = t.di.size();
    std::vector<double> cp(N), dp(N), u(N);
    double piv = t.di[0];
    auto check = [&](double pivot, double scale) {
        if (!(std::abs(pivot) > 1e-13 * scale) || !std::isfinite(pivot))
            raise(ErrorCode::SingularSystem, kModule, "vanishing pivot in the tridiagonal solve");
    };
    check(piv, std::abs(t.di[0]) + std::abs(t.up[0]));
    cp[0] = t.up[0] / piv;
    dp[0] = t.rhs[0] / piv;
    for (std::size_t i = 1; i < N; ++i) {
        piv = t.di[i] - t.lo[i] * cp[i - 1];
        check(piv, std::abs(t.di[i]) + std::abs(t.lo[i]) + std::abs(t.up[i]));
        cp[i] = t.up[i] / piv;
        dp[i] = (t.rhs[i] - t.lo[i] * dp[i - 1]) / piv;
    }
    u[N - 1] = dp[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) u[i] = dp[i] - cp[i] * u[i + 1];
    return u;
}

double operatorResidual(const RadialLaplacian& lap, double diffusion, const std::vector<double>& potential,
                        const std::vector<double>& rhs, const std::vector<double>& u) {
    const std::size_t N = u.size();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double r = -diffusion * lap.applyAt(u, i) + potential[i] * u[i] - rhs[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

GridFunction solveShifted(const EllipticProblem& prob) {
    if (!(prob.lambda >= 0.0)) raise(ErrorCode::ParameterRange, kModule, "shift Lambda must be >= 0");
    const GridPtr& grid = prob.f.grid;
    const RadialLaplacian lap(prob.metric, grid, Measure::Physical);
    const std::size_t N = grid->size();
    const std::vector<double> V(N, prob.lambda);
    std::vector<double> u = solveOperator(lap, 1.0, V, prob.f.values, prob.outer);
    for (double v : u)
        if (!std::isfinite(v)) raise(ErrorCode::SingularSystem, kModule, "non-finite solution");
    // Relative to the size of the terms in each row.
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double km = i > 0 ? lap.conductance()[i - 1] : 0.0;
        const double d = (km + lap.conductance()[i]) / lap.mass()[i] + prob.lambda;
        scale = std::max({scale, std::abs(prob.f.values[i]), d * std::abs(u[i])});
    }
    const double res = operatorResidual(lap, 1.0, V, prob.f.values, u);
    if (res > 1e-10 * std::max(scale, 1e-300))
        raise(ErrorCode::SingularSystem, kModule, "residual of the direct solve exceeds 1e-10 relative");
    return GridFunction{grid, std::move(u), "u", {}};
}

double indicialRadius(double lambda, int n) {
    if (!(lambda >= 0.0)) raise(ErrorCode::ParameterRange, kModule, "Lambda must be >= 0");
    if (n < 2) raise(ErrorCode::Dimension, kModule, "dimension must be >= 2");
    const double h = 0.5 * (n - 1);
    return std::sqrt(h * h + lambda);
}

bool fredholmRangeH(double delta, double q, int n, double R) {
    if (!(q > 1.0)) raise(ErrorCode::ParameterRange, kModule, "q must lie in (1, inf)");
    return std::abs(delta + (n - 1) / q - 0.5 * (n - 1)) < R;
}

bool fredholmRangeX(double delta, int n, double R) { return std::abs(delta - 0.5 * (n - 1)) < R; }

bool compatibleIndices(double s, double p, int d, double sigma, double q, int n) {
    if (!(p > 1.0) || !(q > 1.0)) raise(ErrorCode::ParameterRange, kModule, "p and q must lie in (1, inf)");
    const double pStarInv = 1.0 - 1.0 / p;
    const double mid = 1.0 / q - sigma / n;
    return d - s <= sigma && sigma <= s && 1.0 / p - s / n <= mid && mid <= pStarInv - (d - s) / n;
}

bool weakL2Condition(double s, double p, int d, int n) {
    if (!(p > 1.0)) raise(ErrorCode::ParameterRange, kModule, "p must lie in (1, inf)");
    return s >= 0.5 * d && 1.0 / p - s / n <= 0.5 - 0.5 * d / n;
}

namespace {

// Marches K+(u_{i+1}-u_i) = K-(u_i-u_{i-1}) + Lambda M_i u_i outward from (i0, i0+1).
std::vector<double> march(const RadialLaplacian& lap, double lambda, std::size_t i0, double u0, double u1) {
    const std::vector<double>& M = lap.mass();
    const std::vector<double>& K = lap.conductance();
    const std::size_t N = M.size();
    std::vector<double> u(N, 0.0);
    u[i0] = u0;
    u[i0 + 1] = u1;
    for (std::size_t i = i0 + 1; i + 1 < N; ++i)
        u[i + 1] = u[i] + (K[i - 1] * (u[i] - u[i - 1]) + lambda * M[i] * u[i]) / K[i];
    return u;
}

}  // namespace

ExponentPair homogeneousExponents(const RadialMetric& m, const GridPtr& grid, double lambda) {
    if (!(lambda >= 0.0)) raise(ErrorCode::ParameterRange, kModule, "Lambda must be >= 0");
    const RadialGrid& g = *grid;
    const double eps = g.rhoMin();
    if (!(100.0 * eps < 0.05)) raise(ErrorCode::Precondition, kModule, "truncation too coarse for exponent fits");
    const RadialLaplacian lap(m, grid, Measure::Physical);
    std::size_t i0 = 0;
    while (i0 + 2 < g.size() && g.r()[i0] < 0.5) ++i0;
    const std::vector<double> ua = march(lap, lambda, i0, 1.0, 1.0);
    const std::vector<double> ub = march(lap, lambda, i0, 0.0, 1.0);

    GridFunction slow = makeGridFunction(grid, ua, "slow");
    const DecayFit fs = decayExponent(slow, 2.0 * eps, 100.0 * eps);

    // Remove the slow branch from ub by least squares near the truncation.
    double num = 0.0, den = 0.0;
    for (std::size_t i = i0; i < g.size(); ++i) {
        const double rho = g.rho()[i];
        if (rho < eps * (1.0 - 1e-12) || rho > 1.5 * eps) continue;
        num += ua[i] * ub[i];
        den += ua[i] * ua[i];
    }
    if (!(den > 0.0)) raise(ErrorCode::InsufficientData, kModule, "no samples near the truncation");
    const double c = num / den;
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = ub[i] - c * ua[i];
    GridFunction fast = makeGridFunction(grid, w, "fast");
    const DecayFit ff = decayExponent(fast, 100.0 * eps, std::min(1000.0 * eps, 0.05));

    auto good = [](const DecayFit& f) { return f.r2 >= 0.999 || f.rms <= 1e-4; };
    if (!good(fs) || !good(ff)) raise(ErrorCode::FitQuality, kModule, "exponent fit quality below threshold");
    ExponentPair out{fs.beta, ff.beta, fs.r2, ff.r2};
    if (out.deltaMinus > out.deltaPlus) {
        std::swap(out.deltaMinus, out.deltaPlus);
        std::swap(out.r2Minus, out.r2Plus);
    }
    return out;
}

std::vector<FredholmRow> fredholmScan(const RadialMetric& m, const GridPtr& grid, const std::vector<double>& lambdas,
                                      const std::vector<double>& deltas) {
    const int n = grid->dimension();
    const double eps = grid->rhoMin();
    std::vector<FredholmRow> rows;
    const RadialLaplacian lap(m, grid, Measure::Physical);
    for (double lambda : lambdas) {
        const double R = indicialRadius(lambda, n);
        for (double delta : deltas) {
            GridFunction f = sampleFunction(grid, [delta](double, double rho) { return std::pow(rho, delta); }, "f");
            const std::vector<double> V(grid->size(), lambda);
            std::vector<double> u;
            try {
                u = solveOperator(lap, 1.0, V, f.values, OuterCondition::decay(delta));
            } catch (const Error& e) {
                // decay condition matching a constant kernel element
                if (e.code() != ErrorCode::SingularSystem) throw;
                u = solveOperator(lap, 1.0, V, f.values, OuterCondition::dirichlet(0.0));
            }
            const double res = operatorResidual(lap, 1.0, V, f.values, u);
            // deep window: the admixed rho^{delta_+} branch fades like rho^{delta_+ - delta}
            double fitted = std::numeric_limits<double>::quiet_NaN();
            try {
                fitted = decayExponent(makeGridFunction(grid, u, "u"), 20.0 * eps, std::min(0.01, 2000.0 * eps)).beta;
            } catch (const Error& e) {
                // solution below the mask level on the whole window
                if (e.code() != ErrorCode::InsufficientData) throw;
            }
            rows.push_back({lambda, delta, fredholmRangeX(delta, n, R), fredholmRangeH(delta, 2.0, n, R), fitted, res});
        }
    }
    return rows;
}

void writeFredholmCsv(const std::vector<FredholmRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorCode::Io, kModule, "cannot open " + path);
    f << "lambda,delta,in_range_x,in_range_h2,fitted_exponent,residual\n";
    char buf[160];
    for (const FredholmRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%d,%.17g,%.17g\n", r.lambda, r.delta, r.inRangeX ? 1 : 0,
                      r.inRangeH ? 1 : 0, r.fitted, r.residual);
        f << buf;
    }
}

}  // namespace ahy
