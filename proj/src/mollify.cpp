#include "mollify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "mollify";

void requirePositive(const HPoint& z) {
    if (!(z.y > 0.0)) raise(ErrorCode::ParameterRange, kModule, "half-plane points need y > 0");
}

// Lagrange weights for nodes 0..3 at position t.
void cubicWeights(double t, double w[4]) {
    const double a = t, b = t - 1.0, c = t - 2.0, d = t - 3.0;
    w[0] = -b * c * d / 6.0;
    w[1] = a * c * d / 2.0;
    w[2] = -a * b * d / 2.0;
    w[3] = a * b * c / 6.0;
}

struct Stencil {
    std::size_t j0;
    double wy[4];
};

Stencil yStencil(const HalfSpaceField& u, double y) {
    const double t = std::log(y / u.y().front()) / u.logStep();
    const double top = static_cast<double>(u.ny() - 1);
    if (t < -1e-9 || t > top + 1e-9) raise(ErrorCode::DomainExhaustion, kModule, "evaluation point outside the y range");
    const long base = static_cast<long>(std::floor(t)) - 1;
    const long j0 = std::clamp<long>(base, 0, static_cast<long>(u.ny()) - 4);
    Stencil s{static_cast<std::size_t>(j0), {}};
    cubicWeights(t - static_cast<double>(j0), s.wy);
    return s;
}

// Levels whose kernel support (log y within +-r) stays inside the sampled y range.
std::pair<std::size_t, std::size_t> validLevels(const HalfSpaceField& u, double r) {
    const double lo = u.y().front() * std::exp(r) * (1.0 - 1e-12);
    const double hi = u.y().back() * std::exp(-r) * (1.0 + 1e-12);
    std::size_t j0 = u.ny(), j1 = 0;
    for (std::size_t j = 0; j < u.ny(); ++j) {
        if (u.y()[j] >= lo && u.y()[j] <= hi) {
            j0 = std::min(j0, j);
            j1 = std::max(j1, j);
        }
    }
    if (j0 > j1 || j1 - j0 + 1 < 5)
        raise(ErrorCode::DomainExhaustion, kModule, "y range too short for the kernel support (need 5 output levels)");
    return {j0, j1};
}

}  // namespace

HPoint groupMul(const HPoint& z, const HPoint& w) {
    requirePositive(z);
    requirePositive(w);
    return {z.x + z.y * w.x, z.y * w.y};
}

HPoint groupInv(const HPoint& z) {
    requirePositive(z);
    return {-z.x / z.y, 1.0 / z.y};
}

double hyperbolicDistance(const HPoint& a, const HPoint& b) {
    requirePositive(a);
    requirePositive(b);
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::acosh(1.0 + (dx * dx + dy * dy) / (2.0 * a.y * b.y));
}

// ---------------------------------------------------------------------------

HalfSpaceField::HalfSpaceField(double period, std::size_t nx, double yMin, double yMax, std::size_t ny) {
    if (!(period > 0.0) || nx < 4) raise(ErrorCode::ParameterRange, kModule, "x grid needs period > 0 and nx >= 4");
    if (!(yMin > 0.0 && yMax > yMin) || ny < 5)
        raise(ErrorCode::ParameterRange, kModule, "y grid needs 0 < yMin < yMax and ny >= 5");
    period_ = period;
    nx_ = nx;
    logStep_ = std::log(yMax / yMin) / static_cast<double>(ny - 1);
    y_.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) y_[j] = yMin * std::exp(logStep_ * static_cast<double>(j));
    y_.back() = yMax;
    v_.assign(nx * ny, 0.0);
}

HalfSpaceField HalfSpaceField::sample(double period, std::size_t nx, double yMin, double yMax, std::size_t ny,
                                      const std::function<double(double, double)>& f) {
    HalfSpaceField u(period, nx, yMin, yMax, ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double v = f(u.x(i), u.y_[j]);
            if (!std::isfinite(v)) raise(ErrorCode::InvalidArgument, kModule, "field sample is not finite");
            u.at(i, j) = v;
        }
    return u;
}

HalfSpaceField HalfSpaceField::levels(std::size_t j0, std::size_t j1) const {
    if (j1 < j0 || j1 >= ny()) raise(ErrorCode::InvalidArgument, kModule, "level range out of bounds");
    HalfSpaceField out;
    out.period_ = period_;
    out.nx_ = nx_;
    out.logStep_ = logStep_;
    out.y_.assign(y_.begin() + static_cast<long>(j0), y_.begin() + static_cast<long>(j1) + 1);
    out.v_.assign(v_.begin() + static_cast<long>(j0 * nx_), v_.begin() + static_cast<long>((j1 + 1) * nx_));
    return out;
}

double HalfSpaceField::interpolate(double x, double y) const {
    const Stencil s = yStencil(*this, y);
    const double p = x / dx();
    const double fl = std::floor(p);
    double wx[4];
    cubicWeights(p - fl + 1.0, wx);
    const long n = static_cast<long>(nx_);
    long i0 = (static_cast<long>(fl) - 1) % n;
    if (i0 < 0) i0 += n;
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        const std::size_t j = s.j0 + static_cast<std::size_t>(a);
        double row = 0.0;
        for (int b = 0; b < 4; ++b) row += wx[b] * at(static_cast<std::size_t>((i0 + b) % n), j);
        acc += s.wy[a] * row;
    }
    return acc;
}

double HalfSpaceField::supAbs() const {
    double m = 0.0;
    for (double v : v_) m = std::max(m, std::abs(v));
    return m;
}

void HalfSpaceField::writeCsv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) raise(ErrorCode::Io, kModule, "cannot open " + path);
    f << "x,y,value\n";
    char buf[96];
    for (std::size_t j = 0; j < ny(); ++j)
        for (std::size_t i = 0; i < nx_; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x(i), y_[j], at(i, j));
            f << buf;
        }
}

HalfSpaceField operator-(const HalfSpaceField& a, const HalfSpaceField& b) {
    if (a.nx() != b.nx() || a.ny() != b.ny() || a.y().front() != b.y().front())
        raise(ErrorCode::InvalidArgument, kModule, "fields live on different grids");
    HalfSpaceField out = a;
    for (std::size_t j = 0; j < a.ny(); ++j)
        for (std::size_t i = 0; i < a.nx(); ++i) out.at(i, j) -= b.at(i, j);
    return out;
}

// ---------------------------------------------------------------------------

Kernel::Kernel(std::size_t resolution, double radius) : radius_(radius) {
    if (resolution < 4) raise(ErrorCode::ParameterRange, kModule, "kernel resolution must be >= 4");
    if (!(radius > 0.0 && radius <= 0.5)) raise(ErrorCode::ParameterRange, kModule, "kernel radius must lie in (0, 1/2]");
    const double S = std::sinh(radius);
    const double hx = 2.0 * S / static_cast<double>(resolution);
    const double hs = 2.0 * radius / static_cast<double>(resolution);
    std::vector<double> raw;
    for (std::size_t a = 0; a < resolution; ++a)
        for (std::size_t b = 0; b < resolution; ++b) {
            const double xi = -S + (static_cast<double>(a) + 0.5) * hx;
            const double s = -radius + (static_cast<double>(b) + 0.5) * hs;
            const HPoint w{xi, std::exp(s)};
            const double v = psi(w);
            if (v <= 0.0) continue;
            nodes_.push_back(w);
            raw.push_back(v * std::exp(-s) * hx * hs);  // dV = eta^{-2} dxi deta = eta^{-1} dxi ds
        }
    for (double w : raw) rawMass_ += w;
    weights_.resize(raw.size());
    for (std::size_t q = 0; q < raw.size(); ++q) weights_[q] = raw[q] / rawMass_;
}

double Kernel::psi(const HPoint& w) const {
    const double d = hyperbolicDistance(w, {0.0, 1.0});
    if (d >= radius_) return 0.0;
    const double t = d / radius_;
    return std::exp(-1.0 / (1.0 - t * t));
}

double Kernel::momentX() const {
    double m = 0.0;
    for (std::size_t q = 0; q < nodes_.size(); ++q) m += weights_[q] * nodes_[q].x;
    return m;
}

double Kernel::momentY() const {
    double m = 0.0;
    for (std::size_t q = 0; q < nodes_.size(); ++q) m += weights_[q] * nodes_[q].y;
    return m;
}

HalfSpaceField hConvolve(const HalfSpaceField& u, const Kernel& psi) {
    const auto [j0, j1] = validLevels(u, psi.radius());
    HalfSpaceField out = u.levels(j0, j1);
    const std::size_t nx = u.nx();
    const long n = static_cast<long>(nx);
    const auto& nodes = psi.nodes();
    const auto& weights = psi.weights();
    parallelFor(out.ny(), [&](std::size_t jo) {
        const double y = out.y()[jo];
        std::vector<double> acc(nx, 0.0), row(nx);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const Stencil s = yStencil(u, y * nodes[q].y);
            // The x shift y*xi is the same for every output column.
            const double p = y * nodes[q].x / u.dx();
            const double fl = std::floor(p);
            double wx[4];
            cubicWeights(p - fl + 1.0, wx);
            long off = (static_cast<long>(fl) - 1) % n;
            if (off < 0) off += n;
            for (std::size_t i = 0; i < nx; ++i) row[i] = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double* src = &u.values()[(s.j0 + static_cast<std::size_t>(a)) * nx];
                const double wa = s.wy[a];
                for (int b = 0; b < 4; ++b) {
                    const double w = wa * wx[b];
                    long start = off + b;
                    if (start >= n) start -= n;
                    const std::size_t split = nx - static_cast<std::size_t>(start);
                    for (std::size_t i = 0; i < split; ++i) row[i] += w * src[static_cast<std::size_t>(start) + i];
                    for (std::size_t i = split; i < nx; ++i) row[i] += w * src[i - split];
                }
            }
            const double wq = weights[q];
            for (std::size_t i = 0; i < nx; ++i) acc[i] += wq * row[i];
        }
        for (std::size_t i = 0; i < nx; ++i) out.at(i, jo) = acc[i];
    });
    return out;
}

Box productBox(const Box& b, const Kernel& psi) {
    const double r = psi.radius();
    const double spread = b.y1 * std::exp(r) * std::sinh(r);
    return {b.x0 - spread, b.x1 + spread, b.y0 * std::exp(-r), b.y1 * std::exp(r)};
}

HalfSpaceField yDerivative(const HalfSpaceField& u, int k) {
    if (k < 0 || k > 3) raise(ErrorCode::ParameterRange, kModule, "y-derivative order must lie in 0..3");
    if (k == 0) return u;
    HalfSpaceField out = u;
    const std::size_t ny = u.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t j0 = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(j) - 2, 0, static_cast<long>(ny) - 5));
        std::vector<double> nodes(5);
        for (std::size_t a = 0; a < 5; ++a) nodes[a] = u.y()[j0 + a] - u.y()[j];
        const std::vector<double> w = fornbergWeights(0.0, nodes, k);
        for (std::size_t i = 0; i < u.nx(); ++i) {
            double acc = 0.0;
            for (std::size_t a = 0; a < 5; ++a) acc += w[a] * u.at(i, j0 + a);
            out.at(i, j) = acc;
        }
    }
    return out;
}

HalfSpaceField sOperator(const HalfSpaceField& u, int k) {
    if (k < 1 || k > 4) raise(ErrorCode::ParameterRange, kModule, "S_k needs 1 <= k <= 4 (stencil support)");
    HalfSpaceField out = u;
    double fact = 1.0;
    for (int j = 1; j < k; ++j) {
        fact *= j;
        const HalfSpaceField d = yDerivative(u, j);
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t jj = 0; jj < u.ny(); ++jj) {
            const double c = sign * std::pow(u.y()[jj], j) / fact;
            for (std::size_t i = 0; i < u.nx(); ++i) out.at(i, jj) += c * d.at(i, jj);
        }
    }
    return out;
}

std::vector<double> boundaryTrace(const HalfSpaceField& u) {
    const double y0 = u.y()[0], y1 = u.y()[1], y2 = u.y()[2];
    const double l0 = y1 * y2 / ((y0 - y1) * (y0 - y2));
    const double l1 = y0 * y2 / ((y1 - y0) * (y1 - y2));
    const double l2 = y0 * y1 / ((y2 - y0) * (y2 - y1));
    std::vector<double> t(u.nx());
    for (std::size_t i = 0; i < u.nx(); ++i) t[i] = l0 * u.at(i, 0) + l1 * u.at(i, 1) + l2 * u.at(i, 2);
    return t;
}

TaylorResult taylorExpand(const HalfSpaceField& u, int m, const Kernel& psi, double traceTol) {
    if (m < 1 || m > 3) raise(ErrorCode::ParameterRange, kModule, "Taylor order m must lie in 1..3");
    const auto [j0, j1] = validLevels(u, psi.radius());
    const double scale = std::max(1.0, u.supAbs());
    TaylorResult res{{}, {}, u.levels(j0, j1)};
    double fact = 1.0;
    for (int k = 0; k < m; ++k) {
        if (k > 0) fact *= k;
        const HalfSpaceField dk = yDerivative(u, k);
        const std::vector<double> tr = boundaryTrace(dk);
        double worst = 0.0;
        for (double t : tr) worst = std::max(worst, std::abs(t));
        HalfSpaceField term = u.levels(j0, j1);
        const bool zero = worst <= traceTol * scale;
        if (zero) {
            for (std::size_t j = 0; j < term.ny(); ++j)
                for (std::size_t i = 0; i < term.nx(); ++i) term.at(i, j) = 0.0;
        } else {
            term = sOperator(hConvolve(dk, psi), m - k);
        }
        for (std::size_t j = 0; j < term.ny(); ++j) {
            const double c = std::pow(term.y()[j], k) / fact;
            for (std::size_t i = 0; i < term.nx(); ++i) res.remainder.at(i, j) -= c * term.at(i, j);
        }
        res.terms.push_back(std::move(term));
        res.zeroed.push_back(zero);
    }
    return res;
}

DecayFit yDecay(const HalfSpaceField& u, double yLo, double yHi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < u.ny(); ++j) {
        const double y = u.y()[j];
        if (y < yLo || y > yHi) continue;
        double m = 0.0;
        for (std::size_t i = 0; i < u.nx(); ++i) m = std::max(m, std::abs(u.at(i, j)));
        if (!(m >= 1e-14)) continue;
        const double a = std::log(y), b = std::log(m);
        sx += a; sy += b; sxx += a * a; sxy += a * b; syy += b * b;
        ++count;
    }
    if (count < 3) raise(ErrorCode::InsufficientData, kModule, "fewer than 3 unmasked levels in the fit window");
    const double c = static_cast<double>(count);
    const double vx = sxx - sx * sx / c, vy = syy - sy * sy / c, cxy = sxy - sx * sy / c;
    DecayFit fit;
    fit.points = count;
    fit.beta = cxy / vx;
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    fit.rms = std::sqrt(std::max(vy - fit.beta * cxy, 0.0) / c);
    return fit;
}

double maxSecondDifference(const HalfSpaceField& u) {
    double m = 0.0;
    const std::size_t n = u.nx();
    for (std::size_t j = 0; j < u.ny(); ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = u.at((i + 1) % n, j) - 2.0 * u.at(i, j) + u.at((i + n - 1) % n, j);
            m = std::max(m, std::abs(d));
        }
    return m;
}

double hyperbolicSecondDifference(const HalfSpaceField& u) {
    double m = 0.0;
    const std::size_t n = u.nx();
    for (std::size_t j = 0; j < u.ny(); ++j) {
        const double scale = u.y()[j] / u.dx();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = u.at((i + 1) % n, j) - 2.0 * u.at(i, j) + u.at((i + n - 1) % n, j);
            m = std::max(m, std::abs(d) * scale * scale);
        }
    }
    return m;
}

}  // namespace ahy
