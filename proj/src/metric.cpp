#include "metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace ahy {

namespace {

constexpr const char* kModule = "geometry";

// rho^k with two derivatives, integer k >= 0, safe at rho = 0.
Jet monomial(double rho, int k) {
    if (k == 0) return {1.0, 0.0, 0.0};
    const double pk1 = k >= 1 ? std::pow(rho, k - 1) : 0.0;
    const double pk2 = k >= 2 ? std::pow(rho, k - 2) : 0.0;
    return {std::pow(rho, k), k * pk1, k * (k - 1) * pk2};
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

}  // namespace

Jet operator*(const Jet& f, const Jet& g) {
    return {f.v * g.v, f.d1 * g.v + f.v * g.d1, f.d2 * g.v + 2.0 * f.d1 * g.d1 + f.v * g.d2};
}

Jet pow(const Jet& f, double e) {
    if (e == 0.0) return {1.0, 0.0, 0.0};
    if (e == 1.0) return f;
    const double p2 = std::pow(f.v, e - 2.0);
    const double p1 = p2 * f.v;
    return {p1 * f.v, e * p1 * f.d1, e * (e - 1.0) * p2 * f.d1 * f.d1 + e * p1 * f.d2};
}

Jet chain(const Jet& outer, const Jet& inner) {
    return {outer.v, outer.d1 * inner.d1, outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2};
}

double rhoOfR(double r) { return (1.0 - r * r) / (1.0 + r * r); }

Jet rhoJet(double r) {
    const double w = 1.0 + r * r;
    return {(1.0 - r * r) / w, -4.0 * r / (w * w), -4.0 / (w * w) + 16.0 * r * r / (w * w * w)};
}

double rOfRho(double rho) { return std::sqrt((1.0 - rho) / (1.0 + rho)); }

double criticalExponent(int n) {
    if (n <= 2) raise(ErrorCode::CriticalExponent, kModule, "critical exponent 2n/(n-2) undefined for n <= 2");
    return 2.0 * n / (n - 2.0);
}

Constants Constants::of(int n) {
    const double q = criticalExponent(n);
    return {n, q, q + 2.0, -static_cast<double>(n) * (n - 1)};
}

// ---------------------------------------------------------------------------

ConformalFactor ConformalFactor::constant(double lambda) {
    if (!(lambda > 0.0)) raise(ErrorCode::Positivity, kModule, "constant conformal factor must be positive");
    return {Kind::Constant, lambda, 0, 1.0, 0.0};
}

ConformalFactor ConformalFactor::power(double c, int k, double sigma) {
    if (k < 1) raise(ErrorCode::ParameterRange, kModule, "power factor needs integer k >= 1");
    if (!(1.0 + std::min(c, 0.0) > 0.0))
        raise(ErrorCode::Positivity, kModule, "power factor (1 + c rho^k)^sigma needs 1 + c > 0");
    return {Kind::Power, c, k, sigma, 0.0};
}

ConformalFactor ConformalFactor::perturbation(double alpha, int j) {
    if (j < 1) raise(ErrorCode::ParameterRange, kModule, "perturbation needs integer j >= 1");
    // max of rho^j (1 - rho) on [0,1] is below 1/4, so |alpha| < 4 keeps the factor positive
    if (!(std::abs(alpha) < 4.0)) raise(ErrorCode::Positivity, kModule, "perturbation amplitude must satisfy |alpha| < 4");
    return {Kind::Perturbation, alpha, j, 1.0, 0.0};
}

ConformalFactor ConformalFactor::cutoffCorrection(double amplitude, int k, double rhoCut) {
    if (k < 1) raise(ErrorCode::ParameterRange, kModule, "cutoff correction needs k >= 1");
    if (!(rhoCut > 0.0 && rhoCut <= 1.0)) raise(ErrorCode::ParameterRange, kModule, "rho_cut must lie in (0, 1]");
    return {Kind::Cutoff, amplitude, k, 1.0, rhoCut};
}

Jet ConformalFactor::jet(double rho) const {
    switch (kind_) {
        case Kind::Constant:
            return {c_, 0.0, 0.0};
        case Kind::Power: {
            Jet m = monomial(rho, k_);
            return pow(Jet{1.0 + c_ * m.v, c_ * m.d1, c_ * m.d2}, sigma_);
        }
        case Kind::Perturbation: {
            Jet m = monomial(rho, k_);
            Jet m1 = monomial(rho, k_ + 1);
            return {1.0 + c_ * (m.v - m1.v), c_ * (m.d1 - m1.d1), c_ * (m.d2 - m1.d2)};
        }
        case Kind::Cutoff: {
            const double half = 0.5 * rhoCut_;
            Jet eta{1.0, 0.0, 0.0};
            if (rho >= rhoCut_) {
                eta = {0.0, 0.0, 0.0};
            } else if (rho > half) {
                const double t = (rho - half) / half;
                const double s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
                const double s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
                const double s2 = 60.0 * t - 180.0 * t * t + 120.0 * t * t * t;
                eta = {1.0 - s, -s1 / half, -s2 / (half * half)};
            }
            Jet p = eta * monomial(rho, k_);
            return {1.0 + c_ * p.v, c_ * p.d1, c_ * p.d2};
        }
    }
    return {1.0, 0.0, 0.0};
}

bool ConformalFactor::boundaryNormalized() const { return std::abs(boundaryValue() - 1.0) <= 1e-14; }

std::string ConformalFactor::describe() const {
    switch (kind_) {
        case Kind::Constant: return fmt("%.17g", c_);
        case Kind::Power: return fmt("(1%+.17g*rho^%g)^%.17g", c_, k_, sigma_);
        case Kind::Perturbation: return fmt("1%+.17g*rho^%g*(1-rho)", c_, k_);
        case Kind::Cutoff: return fmt("1+eta_{%.17g}(rho)*rho^%g*%.17g", rhoCut_, k_, c_);
    }
    return {};
}

// ---------------------------------------------------------------------------

RadialMetric::RadialMetric(Family family, int n, double scale, std::string provenance)
    : family_(family), n_(n), scale_(scale), hyperbolicBase_(family != Family::Flat),
      provenance_(std::move(provenance)) {
    if (n < 2) raise(ErrorCode::Dimension, kModule, "dimension n must be >= 2");
    if (!(scale > 0.0)) raise(ErrorCode::MetricDegeneracy, kModule, "metric scale must be positive");
}

RadialMetric RadialMetric::hyperbolicBall(int n) {
    return RadialMetric(Family::Hyperbolic, n, 1.0, "hyperbolic");
}

RadialMetric RadialMetric::flat(int n, double scale) {
    return RadialMetric(Family::Flat, n, scale, fmt("flat(scale=%.17g)", scale));
}

RadialMetric RadialMetric::conformalHyperbolic(int n, double c, int k, double sigma) {
    const double q = criticalExponent(n);
    RadialMetric m(Family::Conformal, n, 1.0, fmt("conformal(c=%.17g,k=%g,sigma=%.17g)", c, k, sigma));
    m.multipliers_.push_back({ConformalFactor::power(c, k, sigma), q - 2.0, Target::Both});
    m.validate();
    return m;
}

RadialMetric RadialMetric::perturbedHyperbolic(int n, double alpha, int j, double beta, int l) {
    RadialMetric m(Family::Perturbed, n, 1.0,
                   fmt("perturbed(alpha=%.17g,j=%g,beta=%.17g,l=%g)", alpha, j, beta, l));
    if (alpha != 0.0) m.multipliers_.push_back({ConformalFactor::perturbation(alpha, j), 1.0, Target::A});
    if (beta != 0.0) m.multipliers_.push_back({ConformalFactor::perturbation(beta, l), 1.0, Target::B});
    m.validate();
    return m;
}

MetricSample RadialMetric::sample(double r) const {
    Jet base{scale_, 0.0, 0.0};
    if (hyperbolicBase_) {
        const double w = 1.0 + r * r;
        const double w3 = w * w * w;
        base = {4.0 * scale_ / (w * w), -16.0 * scale_ * r / w3, scale_ * (-16.0 / w3 + 96.0 * r * r / (w3 * w))};
    }
    MetricSample out{base, base};
    if (multipliers_.empty()) return out;
    const Jet rj = rhoJet(r);
    for (const auto& mult : multipliers_) {
        const Jet inR = chain(pow(mult.f.jet(rj.v), mult.exponent), rj);
        if (mult.target != Target::B) out.a = out.a * inR;
        if (mult.target != Target::A) out.b = out.b * inR;
    }
    return out;
}

RadialMetric RadialMetric::withMultiplier(const ConformalFactor& f, double exponent, Target target,
                                          const std::string& note) const {
    RadialMetric m = *this;
    m.multipliers_.push_back({f, exponent, target});
    m.provenance_ += note.empty() ? "*[" + f.describe() + "]^" + fmt("%.17g", exponent) : note;
    m.validate();
    return m;
}

void RadialMetric::validate() const {
    constexpr int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double r = static_cast<double>(i) / samples;
        const MetricSample s = sample(r);
        if (!(s.a.v > 0.0) || !(s.b.v > 0.0) || !std::isfinite(s.a.d2) || !std::isfinite(s.b.d2))
            raise(ErrorCode::MetricDegeneracy, kModule, fmt("non-positive or non-finite coefficient at r=%.6g", r));
    }
    const MetricSample c = sample(0.0);
    if (std::abs(c.a.v - c.b.v) > 1e-12 * c.a.v)
        raise(ErrorCode::MetricDegeneracy, kModule, "a(0) != b(0): metric is not smooth at the center");
}

// ---------------------------------------------------------------------------

double ahDefect(const RadialMetric& m) { return m.sample(1.0).a.v - 1.0; }

double scalarCurvatureCompactified(const RadialMetric& m, double r) {
    if (!(r >= 0.0 && r <= 1.0)) raise(ErrorCode::ParameterRange, kModule, "radius must lie in [0, 1]");
    const int n = m.n();
    const MetricSample s = m.sample(r);
    if (!(s.a.v > 0.0 && s.b.v > 0.0)) raise(ErrorCode::MetricDegeneracy, kModule, "non-positive coefficient");
    if (r < 1e-4) {
        // even-extension limit: with a = a0 + a2 r^2, b = b0 + b2 r^2 one gets
        // R = -n(n-1)(3 b2 - a2)/a0^2
        const MetricSample c = m.sample(0.0);
        const double a2 = 0.5 * c.a.d2;
        const double b2 = 0.5 * c.b.d2;
        return -n * (n - 1.0) * (3.0 * b2 - a2) / (c.a.v * c.a.v);
    }
    const double a = s.a.v, a1 = s.a.d1;
    const double b = s.b.v, b1 = s.b.d1, b2 = s.b.d2;
    const double sb = std::sqrt(b);
    const double c = r * sb;
    const double c1 = sb + r * b1 / (2.0 * sb);
    const double c2 = b1 / sb - r * b1 * b1 / (4.0 * b * sb) + r * b2 / (2.0 * sb);
    return -2.0 * (n - 1.0) * (c2 / a - a1 * c1 / (2.0 * a * a)) / c +
           (n - 1.0) * (n - 2.0) * (1.0 - c1 * c1 / a) / (c * c);
}

double gradRhoSquared(const RadialMetric& m, double r) {
    const Jet rj = rhoJet(r);
    return rj.d1 * rj.d1 / m.sample(r).a.v;
}

double laplacianBarRho(const RadialMetric& m, double r) {
    const int n = m.n();
    const MetricSample s = m.sample(r);
    const Jet rj = rhoJet(r);
    const double w = 1.0 + r * r;
    const double rhoOverR = -4.0 / (w * w);  // rho'/r, regular at the center
    const double a = s.a.v, a1 = s.a.d1;
    const double sb = std::sqrt(s.b.v);
    const double c1 = sb + r * s.b.d1 / (2.0 * sb);
    return rj.d2 / a - rj.d1 * a1 / (2.0 * a * a) + (n - 1.0) * c1 * rhoOverR / (sb * a);
}

double scalarCurvaturePhysicalAt(const RadialMetric& m, double r) {
    const int n = m.n();
    const double rho = rhoOfR(r);
    return -n * (n - 1.0) * gradRhoSquared(m, r) + 2.0 * (n - 1.0) * rho * laplacianBarRho(m, r) +
           rho * rho * scalarCurvatureCompactified(m, r);
}

RadialMetric conformalChangeMetric(const RadialMetric& m, const ConformalFactor& theta) {
    const double q = criticalExponent(m.n());
    if (theta.kind() == ConformalFactor::Kind::Constant && theta.c() == 1.0) return m;
    return m.withMultiplier(theta, q - 2.0, RadialMetric::Target::Both);
}

}  // namespace ahy
