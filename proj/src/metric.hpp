#pragma once

#include <string>
#include <vector>

namespace ahy {

/// A value together with its first two derivatives in a single variable.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

Jet operator*(const Jet& f, const Jet& g);
Jet pow(const Jet& f, double e);
/// Composition h(x) = outer(inner(x)) given outer's jet at inner.v.
Jet chain(const Jet& outer, const Jet& inner);

/// The fixed defining function rho(r) = (1 - r^2)/(1 + r^2).
double rhoOfR(double r);
/// r-derivatives of rho.
Jet rhoJet(double r);
/// Inverse of rhoOfR on [0, 1].
double rOfRho(double rho);

/// Critical exponent q_n = 2n/(n-2); throws for n <= 2.
double criticalExponent(int n);

/// Yamabe constants for dimension n >= 3.
struct Constants {
    int n;
    double q;         // 2n/(n-2)
    double a;         // q + 2
    double rBreve;    // -n(n-1)

    static Constants of(int n);
};

/**
 * Positive analytic function of rho, used both as a conformal factor Theta and as a
 * coefficient multiplier. Derivatives are with respect to rho.
 */
class ConformalFactor {
public:
    enum class Kind { Constant, Power, Perturbation, Cutoff };

    static ConformalFactor constant(double lambda);
    /// (1 + c rho^k)^sigma
    static ConformalFactor power(double c, int k, double sigma);
    /// 1 + alpha rho^j (1 - rho); equals 1 at the center and at the boundary.
    static ConformalFactor perturbation(double alpha, int j);
    /// 1 + eta(rho) rho^k amplitude, with eta a quintic bump equal to 1 on rho < rhoCut/2.
    static ConformalFactor cutoffCorrection(double amplitude, int k, double rhoCut);

    Jet jet(double rho) const;
    double operator()(double rho) const { return jet(rho).v; }
    double boundaryValue() const { return jet(0.0).v; }
    bool boundaryNormalized() const;

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    int k() const { return k_; }
    double sigma() const { return sigma_; }
    double rhoCut() const { return rhoCut_; }
    std::string describe() const;

private:
    ConformalFactor(Kind kind, double c, int k, double sigma, double rhoCut)
        : kind_(kind), c_(c), k_(k), sigma_(sigma), rhoCut_(rhoCut) {}

    Kind kind_;
    double c_;
    int k_;
    double sigma_;
    double rhoCut_;
};

/// Coefficients of gbar = a dr^2 + b r^2 dOmega^2 and their r-derivatives.
struct MetricSample {
    Jet a;
    Jet b;
};

/**
 * Rotationally symmetric compactified metric on the unit ball. The physical metric is
 * g = rho^{-2} gbar. Built from a base family (hyperbolic ball or flat) times a product of
 * analytic rho-multipliers, so every coefficient carries exact derivatives.
 */
class RadialMetric {
public:
    enum class Family { Hyperbolic, Flat, Conformal, Perturbed };
    enum class Target { Both, A, B };

    static RadialMetric hyperbolicBall(int n);
    static RadialMetric flat(int n, double scale = 1.0);
    /// Theta^{q_n - 2} times the hyperbolic metric, Theta = (1 + c rho^k)^sigma.
    static RadialMetric conformalHyperbolic(int n, double c, int k, double sigma = 1.0);
    /// a = a_hyp (1 + alpha rho^j (1 - rho)), b = b_hyp (1 + beta rho^l (1 - rho)).
    static RadialMetric perturbedHyperbolic(int n, double alpha, int j, double beta = 0.0, int l = 1);

    int n() const { return n_; }
    Family family() const { return family_; }
    const std::string& provenance() const { return provenance_; }

    MetricSample sample(double r) const;

    /// New metric with both coefficients (or one) multiplied by f^exponent.
    RadialMetric withMultiplier(const ConformalFactor& f, double exponent, Target target = Target::Both,
                                const std::string& note = {}) const;

    std::size_t multiplierCount() const { return multipliers_.size(); }

private:
    struct Multiplier {
        ConformalFactor f;
        double exponent;
        Target target;
    };

    RadialMetric(Family family, int n, double scale, std::string provenance);
    void validate() const;

    Family family_;
    int n_;
    double scale_;
    bool hyperbolicBase_;
    std::string provenance_;
    std::vector<Multiplier> multipliers_;
};

/// a(1) - 1; zero exactly when |d rho|^2 = 1 on the boundary.
double ahDefect(const RadialMetric& m);

/// Scalar curvature of gbar at r in [0, 1] via the warped-product formula.
double scalarCurvatureCompactified(const RadialMetric& m, double r);

/// |d rho|^2 measured by gbar.
double gradRhoSquared(const RadialMetric& m, double r);

/// Laplacian of rho with respect to gbar.
double laplacianBarRho(const RadialMetric& m, double r);

/// R[g] = -n(n-1)|d rho|^2 + 2(n-1) rho Lap_bar rho + rho^2 R[gbar].
double scalarCurvaturePhysicalAt(const RadialMetric& m, double r);

/// Theta^{q_n - 2} g, i.e. both compactified coefficients times Theta^{q_n - 2}.
RadialMetric conformalChangeMetric(const RadialMetric& m, const ConformalFactor& theta);

}  // namespace ahy
