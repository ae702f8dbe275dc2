#include "fspaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "fspaces";
constexpr double kE = 2.718281828459045;

void requireOrder(int k) {
    if (k > 2) raise(ErrorCode::ParameterRange, kModule, "derivative order k > 2 exceeds the stencil support");
}

// (integral over [lo, hi] of |f|^p drho/rho)^{1/p}; piecewise linear in zeta = -log rho.
double windowIntegral(const GridFunction& f, double p, double lo, double hi) {
    const RadialGrid& g = *f.grid;
    const std::vector<double>& rho = g.rho();
    const double za = -std::log(hi), zb = -std::log(lo);
    auto gval = [&](std::size_t i) { return std::pow(std::abs(f.values[i]), p); };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        // rho decreases with i, so zeta increases
        const double z0 = -std::log(rho[i]), z1 = -std::log(rho[i + 1]);
        if (z1 <= za || z0 >= zb) continue;
        const double a = std::max(z0, za), b = std::min(z1, zb);
        const double g0 = gval(i), g1 = gval(i + 1);
        auto lerp = [&](double z) { return g0 + (g1 - g0) * (z - z0) / (z1 - z0); };
        sum += 0.5 * (lerp(a) + lerp(b)) * (b - a);
    }
    return std::pow(sum, 1.0 / p);
}

}  // namespace

void WeightSpec::validate() const {
    if (k < 0) raise(ErrorCode::ParameterRange, kModule, "derivative order k must be >= 0");
    if (!(p > 1.0) || !std::isfinite(p)) raise(ErrorCode::ParameterRange, kModule, "integrability p must lie in (1, inf)");
    if (!std::isfinite(delta)) raise(ErrorCode::ParameterRange, kModule, "weight delta must be finite");
    if (m && (*m < 0 || *m > k)) raise(ErrorCode::ParameterRange, kModule, "fortification order needs 0 <= m <= k");
}

MobiusCover MobiusCover::build(double epsTrunc, double rhoStart) {
    if (!(epsTrunc > 0.0 && epsTrunc < rhoStart && rhoStart <= 1.0))
        raise(ErrorCode::ParameterRange, kModule, "cover needs 0 < eps < rhoStart <= 1");
    MobiusCover cover;
    cover.rhoStart = rhoStart;
    for (double c = 1.0;; c *= 0.5) {
        const double lo = c / kE, hi = c * kE;
        Window w{c, std::max(lo, epsTrunc), std::min(hi, 1.0), hi > 1.0 || lo < epsTrunc, c > rhoStart * (1.0 + 1e-12)};
        cover.windows.push_back(w);
        if (lo <= epsTrunc) break;
    }
    return cover;
}

int MobiusCover::multiplicity(double epsTrunc) const {
    int worst = 0;
    const int samples = 2000;
    for (int s = 0; s <= samples; ++s) {
        const double t = static_cast<double>(s) / samples;
        const double x = std::exp(std::log(epsTrunc) * (1.0 - t) + std::log(rhoStart) * t);
        int count = 0;
        for (const Window& w : windows)
            if (x >= w.lo && x <= w.hi) ++count;
        worst = std::max(worst, count);
    }
    return worst;
}

std::vector<GridFunction> scaledDerivatives(const GridFunction& u, int k) {
    requireOrder(k);
    std::vector<GridFunction> out{u};
    for (int j = 1; j <= k; ++j) {
        GridFunction d = differentiate(out.back(), 1, Coordinate::Rho);
        for (std::size_t i = 0; i < d.size(); ++i) d.values[i] *= u.grid->rho()[i];
        d.label = "(rho d)^" + std::to_string(j) + " " + u.label;
        out.push_back(std::move(d));
    }
    return out;
}

GridFunction rhoPowerDerivative(const GridFunction& u, int j) {
    requireOrder(j);
    if (j == 0) return u;
    GridFunction d = differentiate(u, j, Coordinate::Rho);
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] *= std::pow(u.grid->rho()[i], j);
    return d;
}

double weightedSobolevNorm(const GridFunction& u, const WeightSpec& w) {
    w.validate();
    requireOrder(w.k);
    double total = 0.0;
    for (const GridFunction& d : scaledDerivatives(u, w.k)) total += quadratureWeighted(d, w.p, w.delta, Measure::Physical);
    return total;
}

GsResult gsNorm(const GridFunction& u, const WeightSpec& w, const MobiusCover& cover) {
    w.validate();
    requireOrder(w.k);
    if (cover.windows.empty()) raise(ErrorCode::InvalidArgument, kModule, "empty Mobius cover");
    const std::vector<GridFunction> ders = scaledDerivatives(u, w.k);
    GsResult out;
    std::vector<double> tail;
    for (const Window& win : cover.windows) {
        double local = 0.0;
        for (const GridFunction& d : ders) local += windowIntegral(d, w.p, win.lo, win.hi);
        const double v = std::pow(win.center, -w.delta) * local;
        out.centers.push_back(win.center);
        out.profile.push_back(v);
        out.clipped.push_back(win.clipped);
        out.value = std::max(out.value, v);
        if (!win.interior && !win.clipped) tail.push_back(v);
    }
    out.unbounded = tail.size() >= 2 && tail.back() > 1.5 * tail.front();
    return out;
}

double fortifiedNormH(const GridFunction& u, const WeightSpec& w) {
    w.validate();
    const int m = w.m.value_or(0);
    const int n = u.grid->dimension();
    double total = 0.0;
    for (int j = 0; j <= m; ++j) {
        const WeightSpec wj{w.k - j, w.p, j - n / w.p, std::nullopt};
        total += weightedSobolevNorm(rhoPowerDerivative(u, j), wj);
    }
    return total;
}

FortifiedXResult fortifiedNormX(const GridFunction& u, const WeightSpec& w, const MobiusCover& cover) {
    w.validate();
    const int m = w.m.value_or(0);
    FortifiedXResult out;
    for (int j = 0; j <= m; ++j) {
        const WeightSpec wj{w.k - j, w.p, static_cast<double>(j), std::nullopt};
        GsResult r = gsNorm(rhoPowerDerivative(u, j), wj, cover);
        out.value += r.value;
        out.unbounded = out.unbounded || r.unbounded;
        out.terms.push_back(std::move(r));
    }
    return out;
}

DecayFit decayExponent(const GridFunction& u, double lo, double hi) {
    const RadialGrid& g = *u.grid;
    if (!(lo > 0.0 && lo < hi && hi <= 0.3 + 1e-12))
        raise(ErrorCode::Precondition, kModule, "fit window must satisfy 0 < lo < hi <= 0.3");
    if (lo < g.rhoMin() * (1.0 - 1e-9)) raise(ErrorCode::Precondition, kModule, "fit window extends below the truncation");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rho = g.rho()[i];
        if (rho < lo || rho > hi) continue;
        const double a = std::abs(u.values[i]);
        if (!(a >= 1e-14)) continue;
        const double x = std::log(rho), y = std::log(a);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
        ++count;
    }
    if (count < 3) raise(ErrorCode::InsufficientData, kModule, "fewer than 3 unmasked samples in the fit window");
    const double c = static_cast<double>(count);
    const double vx = sxx - sx * sx / c, vy = syy - sy * sy / c, cxy = sxy - sx * sy / c;
    DecayFit fit;
    fit.points = count;
    fit.beta = cxy / vx;
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    fit.rms = std::sqrt(std::max(vy - fit.beta * cxy, 0.0) / c);
    return fit;
}

DivergenceCheck normDivergence(const GridFunction& u, const std::vector<double>& eps,
                               const std::function<double(const GridFunction&)>& norm) {
    if (eps.size() < 2) raise(ErrorCode::InvalidArgument, kModule, "divergence check needs two truncation levels");
    DivergenceCheck out;
    out.eps = eps;
    const GridSpec base = u.grid->spec();
    for (double e : eps) {
        GridSpec s = base;
        s.epsTrunc = e;
        out.values.push_back(norm(resample(u, RadialGrid::build(u.grid->dimension(), s))));
    }
    for (std::size_t i = 1; i < out.values.size(); ++i) {
        const double r = out.values[i] / out.values[i - 1];
        out.maxRatio = std::max(out.maxRatio, r);
    }
    out.divergent = out.maxRatio > 1.5;
    return out;
}

void writeProfileCsv(const GsResult& gs, const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorCode::Io, kModule, "cannot open " + path);
    f << "rho,value\n";
    char buf[64];
    for (std::size_t i = 0; i < gs.centers.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", gs.centers[i], gs.profile[i]);
        f << buf;
    }
}

}  // namespace ahy
