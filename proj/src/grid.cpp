#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "errors.hpp"

namespace ahy {

namespace {

constexpr const char* kModule = "grid";
constexpr double kMinTailFraction = 0.95;

// Z(r) = -log rho(r) and its derivative.
double zetaOfR(double r) { return std::log((1.0 + r * r) / (1.0 - r * r)); }
double zetaPrime(double r) { return 4.0 * r / (1.0 - r * r * r * r); }

// C4 polynomial step from 0 (t <= 0) to 1 (t >= 1), with derivative.
void smoothStep(double t, double& beta, double& dbeta) {
    if (t <= 0.0) {
        beta = 0.0;
        dbeta = 0.0;
        return;
    }
    if (t >= 1.0) {
        beta = 1.0;
        dbeta = 0.0;
        return;
    }
    const double t2 = t * t, t4 = t2 * t2;
    beta = t4 * t * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))));
    const double u = 1.0 - t;
    dbeta = 630.0 * t4 * u * u * u * u;
}

MapPoint fromR(double r, double drdx) {
    const double s = 1.0 - r;
    return {r, s, s * (2.0 - s) / (1.0 + r * r), drdx};
}

MapPoint fromRho(double rho, double drhodxOverRho) {
    const double r = rOfRho(rho);
    const double s = 2.0 * rho / ((1.0 + rho) * (1.0 + r));
    // dr/drho = -1/(r (1+rho)^2)
    const double drdx = -drhodxOverRho * rho / (r * (1.0 + rho) * (1.0 + rho));
    return {r, s, rho, drdx};
}

constexpr double kGaussX[5] = {-0.90617984593866399, -0.53846931010568309, 0.0, 0.53846931010568309,
                               0.90617984593866399};
constexpr double kGaussW[5] = {0.23692688505618909, 0.47862867049936647, 0.56888888888888889,
                               0.47862867049936647, 0.23692688505618909};

template <class F>
double gauss5(F&& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int k = 0; k < 5; ++k) sum += kGaussW[k] * f(mid + half * kGaussX[k]);
    return sum * half;
}

}  // namespace

// ---------------------------------------------------------------------------

std::shared_ptr<const RadialGrid> RadialGrid::build(int n, const GridSpec& spec) {
    if (n < 2) raise(ErrorCode::Dimension, kModule, "dimension n must be >= 2");
    if (spec.N < 16) raise(ErrorCode::ParameterRange, kModule, "grid needs N >= 16");
    if (!(spec.epsTrunc > 0.0 && spec.epsTrunc < 0.5))
        raise(ErrorCode::ParameterRange, kModule, "eps_trunc must lie in (0, 0.5)");
    if (!(spec.tailRatio > 0.0 && spec.tailRatio < 1.0))
        raise(ErrorCode::ParameterRange, kModule, "tail ratio must lie in (0, 1)");

    std::shared_ptr<RadialGrid> g(new RadialGrid());
    g->n_ = n;
    g->spec_ = spec;
    const std::size_t N = spec.N;
    const double eps = spec.epsTrunc;
    const double rhoMin = eps * (2.0 - eps) / (1.0 + (1.0 - eps) * (1.0 - eps));
    g->zetaMax_ = -std::log(rhoMin);
    g->rate_ = -std::log(spec.tailRatio) * 511.0;

    bool geometric = spec.grading == Grading::Geometric && g->rate_ > g->zetaMax_;
    if (geometric) {
        // Large eps leaves too little room for the blend at the requested rate; relax the tail until
        // at least 5% of the index range is exactly geometric.
        for (int attempt = 0; attempt < 40 && g->rate_ > g->zetaMax_; ++attempt, g->rate_ /= 1.25) {
            geometric = g->fitGeometricMap() && g->xb_ <= kMinTailFraction;
            if (geometric) break;
        }
    }
    if (!geometric) {
        g->kappa_ = 1.0 - eps;
        g->xa_ = g->xb_ = 2.0;  // never reached
    }

    g->r_.resize(N);
    g->s_.resize(N);
    g->rho_.resize(N);
    g->drdx_.resize(N);
    g->tailStart_ = N;
    for (std::size_t i = 0; i < N; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(N - 1);
        MapPoint p = g->map(x);
        g->r_[i] = p.r;
        g->s_[i] = p.s;
        g->rho_[i] = p.rho;
        g->drdx_[i] = p.drdx;
        if (geometric && g->tailStart_ == N && x >= g->xb_) g->tailStart_ = i;
    }
    g->r_[0] = 0.0;
    g->s_[0] = 1.0;
    g->rho_[0] = 1.0;
    g->r_[N - 1] = 1.0 - eps;
    g->s_[N - 1] = eps;
    g->rho_[N - 1] = rhoMin;

    for (std::size_t i = 1; i < N; ++i) {
        if (!(g->r_[i] > g->r_[i - 1]) || !(g->s_[i] < g->s_[i - 1]) || !(g->rho_[i] < g->rho_[i - 1]) ||
            !(g->drdx_[i] > 0.0))
            raise(ErrorCode::Internal, kModule, "grid map is not monotone; adjust N or the tail ratio");
    }
    return g;
}

MapPoint RadialGrid::map(double x) const {
    if (xa_ > 1.0) {
        const double eps = spec_.epsTrunc;
        const double r = (1.0 - eps) * x;
        const double s = (1.0 - x) + eps * x;
        return {r, s, s * (2.0 - s) / (1.0 + r * r), 1.0 - eps};
    }
    if (x <= xa_) return fromR(kappa_ * x, kappa_);
    if (x >= xb_) return fromRho(std::exp(-zetaMax_ + rate_ * (1.0 - x)), -rate_);
    const double zeta = zetaA_ + rate_ * ((x - xa_) - blendDeficit(x));
    return fromRho(std::exp(-zeta), -rate_ * blendSlope(x));
}

namespace {
constexpr std::size_t kBlendPanels = 2048;
constexpr double kBlendTau = 0.1;  // window starts where the interior slope is this fraction of the tail slope
}  // namespace

// Slope of -log(rho) relative to the tail rate: the uniform-in-r slope blended into 1.
double RadialGrid::blendSlope(double x) const {
    double beta, dbeta;
    smoothStep((x - xa_) / (xb_ - xa_), beta, dbeta);
    const double tau = kappa_ * zetaPrime(kappa_ * x) / rate_;
    return 1.0 - (1.0 - beta) * (1.0 - tau);
}

double RadialGrid::blendDeficit(double x) const {
    const double h = (xb_ - xa_) / static_cast<double>(kBlendPanels);
    const double k = std::clamp(std::floor((x - xa_) / h), 0.0, static_cast<double>(kBlendPanels - 1));
    const double x0 = xa_ + k * h;
    return blendTable_[static_cast<std::size_t>(k)] + gauss5([this](double t) { return 1.0 - blendSlope(t); }, x0, x);
}

// Solves for the join radius r_b: interior r = kappa x with kappa Z'(r_b) = L, blended into the
// exact tail over the window where the interior slope rises from kBlendTau L to L, such that the
// tail ends at rho_min at x = 1.
bool RadialGrid::fitGeometricMap() {
    const double L = rate_;
    auto setup = [&](double rb) {
        kappa_ = L / zetaPrime(rb);
        xb_ = rb / kappa_;
        const double target = kBlendTau * zetaPrime(rb);
        double a = 0.0, b = rb;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (a + b);
            (zetaPrime(mid) < target ? a : b) = mid;
        }
        xa_ = 0.5 * (a + b) / kappa_;
        zetaA_ = zetaOfR(kappa_ * xa_);
        blendTable_.assign(kBlendPanels + 1, 0.0);
        const double h = (xb_ - xa_) / static_cast<double>(kBlendPanels);
        for (std::size_t k = 0; k < kBlendPanels; ++k) {
            const double x0 = xa_ + static_cast<double>(k) * h;
            blendTable_[k + 1] =
                blendTable_[k] + gauss5([this](double t) { return 1.0 - blendSlope(t); }, x0, x0 + h);
        }
        const double zetaB = zetaA_ + L * ((xb_ - xa_) - blendTable_.back());
        return zetaB + L * (1.0 - xb_) - zetaMax_;
    };
    double lo = 1e-6, hi = 1.0 - spec_.epsTrunc;
    if (!(setup(lo) > 0.0) || !(setup(hi) < 0.0)) return false;
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (setup(mid) > 0.0 ? lo : hi) = mid;
    }
    setup(0.5 * (lo + hi));
    return xb_ < 1.0;
}

double RadialGrid::tailRatio() const {
    if (tailStart_ >= size()) return 0.0;
    return std::exp(-rate_ * dx());
}

double RadialGrid::rDiff(std::size_t i, std::size_t j) const {
    if (r_[i] > 0.5 && r_[j] > 0.5) return s_[i] - s_[j];
    return r_[j] - r_[i];
}

GridPtr buildGrid(int n, std::size_t N, Grading grading, double epsTrunc, double tailRatio) {
    return RadialGrid::build(n, GridSpec{N, grading, epsTrunc, tailRatio});
}

// ---------------------------------------------------------------------------

GridFunction sampleFunction(const GridPtr& grid, std::function<double(double, double)> f, std::string label) {
    GridFunction u{grid, std::vector<double>(grid->size()), std::move(label), std::move(f)};
    for (std::size_t i = 0; i < grid->size(); ++i) u.values[i] = u.closure(grid->r()[i], grid->rho()[i]);
    return u;
}

GridFunction makeGridFunction(const GridPtr& grid, std::vector<double> values, std::string label) {
    if (values.size() != grid->size())
        raise(ErrorCode::InvalidArgument, kModule, "value array length differs from grid size");
    for (double v : values)
        if (!std::isfinite(v)) raise(ErrorCode::InvalidArgument, kModule, "grid function has non-finite values");
    return GridFunction{grid, std::move(values), std::move(label), {}};
}

GridFunction resample(const GridFunction& u, const GridPtr& grid) {
    if (!u.closure) raise(ErrorCode::InvalidArgument, kModule, "resampling needs an analytic closure");
    return sampleFunction(grid, u.closure, u.label);
}

std::vector<double> fornbergWeights(double z, const std::vector<double>& x, int m) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

GridFunction differentiate(const GridFunction& u, int order, Coordinate coordinate) {
    if (order != 1 && order != 2) raise(ErrorCode::ParameterRange, kModule, "derivative order must be 1 or 2");
    const RadialGrid& g = *u.grid;
    const std::size_t N = g.size();
    if (N < 5) raise(ErrorCode::ParameterRange, kModule, "differentiation needs at least 5 nodes");
    auto offset = [&](std::size_t i, std::size_t j) {
        return coordinate == Coordinate::R ? g.rDiff(i, j) : g.rho()[j] - g.rho()[i];
    };
    GridFunction out{u.grid, std::vector<double>(N), u.label + (order == 1 ? "'" : "''"), {}};
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < N; ++i) {
        idx.clear();
        const std::size_t width = (i == 0 || i == N - 1) ? static_cast<std::size_t>(order + 2) : 3;
        if (i == 0) {
            for (std::size_t k = 0; k < width; ++k) idx.push_back(k);
        } else if (i == N - 1) {
            for (std::size_t k = 0; k < width; ++k) idx.push_back(N - width + k);
        } else {
            idx = {i - 1, i, i + 1};
        }
        std::vector<double> nodes(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) nodes[k] = offset(i, idx[k]);
        const std::vector<double> w = fornbergWeights(0.0, nodes, order);
        double acc = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) acc += w[k] * u.values[idx[k]];
        out.values[i] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------

RadialLaplacian::RadialLaplacian(const RadialMetric& m, GridPtr grid, Measure measure) : grid_(std::move(grid)) {
    const RadialGrid& g = *grid_;
    const int n = g.dimension();
    if (m.n() != n) raise(ErrorCode::Dimension, kModule, "metric and grid dimensions differ");
    const bool physical = measure == Measure::Physical;
    auto densities = [&](const MapPoint& p, double& mu, double& kappa) {
        const MetricSample s = m.sample(p.r);
        if (!(s.a.v > 0.0 && s.b.v > 0.0)) raise(ErrorCode::MetricDegeneracy, kModule, "non-positive coefficient");
        const double cpow = std::pow(p.r, n - 1) * std::pow(s.b.v, 0.5 * (n - 1));
        const double sa = std::sqrt(s.a.v);
        mu = cpow * sa;
        kappa = cpow / sa;
        if (physical) {
            mu *= std::pow(p.rho, -n);
            kappa *= std::pow(p.rho, 2 - n);
        }
    };
    const std::size_t N = g.size();
    const double h = g.dx();
    mass_.assign(N, 0.0);
    cond_.assign(N - 1, 0.0);
    auto massDensity = [&](double x) {
        const MapPoint p = g.map(x);
        double mu, kappa;
        densities(p, mu, kappa);
        return mu * p.drdx;
    };
    for (std::size_t i = 0; i < N; ++i) {
        const double xi = g.x(i);
        const double lo = i == 0 ? 0.0 : xi - 0.5 * h;
        const double hi = i == N - 1 ? 1.0 : xi + 0.5 * h;
        mass_[i] = gauss5(massDensity, lo, xi) + gauss5(massDensity, xi, hi);
    }
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const MapPoint p = g.map((static_cast<double>(i) + 0.5) * h);
        double mu, kappa;
        densities(p, mu, kappa);
        cond_[i] = kappa / (p.drdx * h);
    }
}

double RadialLaplacian::applyAt(const std::vector<double>& u, std::size_t i) const {
    double flux = cond_[i] * (u[i + 1] - u[i]);
    if (i > 0) flux -= cond_[i - 1] * (u[i] - u[i - 1]);
    return flux / mass_[i];
}

std::vector<double> RadialLaplacian::apply(const std::vector<double>& u) const {
    const std::size_t N = mass_.size();
    if (u.size() != N) raise(ErrorCode::InvalidArgument, kModule, "field length differs from operator size");
    std::vector<double> out(N);
    for (std::size_t i = 0; i + 1 < N; ++i) out[i] = applyAt(u, i);
    out[N - 1] = 3.0 * out[N - 2] - 3.0 * out[N - 3] + out[N - 4];
    return out;
}

RadialLaplacian RadialLaplacian::conformallyChanged(const std::vector<double>& theta, double q) const {
    const std::size_t N = mass_.size();
    if (theta.size() != N) raise(ErrorCode::InvalidArgument, kModule, "conformal factor length mismatch");
    RadialLaplacian out;
    out.grid_ = grid_;
    out.mass_.resize(N);
    out.cond_.resize(N - 1);
    for (std::size_t i = 0; i < N; ++i) {
        if (!(theta[i] > 0.0)) raise(ErrorCode::Positivity, kModule, "conformal factor must be positive");
        out.mass_[i] = std::pow(theta[i], q) * mass_[i];
    }
    for (std::size_t i = 0; i + 1 < N; ++i) out.cond_[i] = theta[i] * theta[i + 1] * cond_[i];
    return out;
}

GridFunction laplaceBeltrami(const RadialMetric& m, const GridFunction& u) {
    RadialLaplacian lap(m, u.grid, Measure::Physical);
    return GridFunction{u.grid, lap.apply(u.values), "lap(" + u.label + ")", {}};
}

double sphereVolume(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double quadratureWeighted(const GridFunction& u, double p, double delta, Measure measure) {
    if (!(p >= 1.0)) raise(ErrorCode::ParameterRange, kModule, "quadrature exponent p must be >= 1");
    const RadialGrid& g = *u.grid;
    const int n = g.dimension();
    const std::size_t N = g.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double r = g.r()[i], rho = g.rho()[i];
        const double w = 2.0 / (1.0 + r * r);  // sqrt(a) = sqrt(b) for the reference metric
        double dens = std::pow(r * w, n - 1) * w * g.drdx()[i];
        if (measure == Measure::Physical) dens *= std::pow(rho, -n);
        const double f = std::pow(std::abs(std::pow(rho, -delta) * u.values[i]), p) * dens;
        sum += (i == 0 || i == N - 1 ? 0.5 : 1.0) * f;
    }
    return std::pow(sum * g.dx() * sphereVolume(n), 1.0 / p);
}

void writeCsv(const GridFunction& u, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) raise(ErrorCode::Io, kModule, "cannot open " + path);
    std::fprintf(f, "r,rho,value\n");
    for (std::size_t i = 0; i < u.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", u.grid->r()[i], u.grid->rho()[i], u.values[i]);
    std::fclose(f);
}

}  // namespace ahy
