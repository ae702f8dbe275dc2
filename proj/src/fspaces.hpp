#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ahy {

/// Integer smoothness k, integrability p, weight delta, optional fortification order m <= k.
struct WeightSpec {
    int k = 0;
    double p = 2.0;
    double delta = 0.0;
    std::optional<int> m;

    void validate() const;
    bool operator==(const WeightSpec&) const = default;
};

struct Window {
    double center;
    double lo, hi;   // rho-interval, hi clipped at 1
    bool clipped;    // touches rho = 1 or the truncation eps
    bool interior;   // center above the start of the dyadic tail
};

/// Dyadic family of windows [c/e, c*e] with centers c = 2^{-i}.
struct MobiusCover {
    std::vector<Window> windows;
    double rhoStart = 0.125;

    static MobiusCover build(double epsTrunc, double rhoStart = 0.125);
    /// Largest number of windows containing a single point of (eps, rhoStart].
    int multiplicity(double epsTrunc) const;
};

/// (rho d/drho)^j u for j = 0..k (j <= 2).
std::vector<GridFunction> scaledDerivatives(const GridFunction& u, int k);
/// rho^j (d/drho)^j u.
GridFunction rhoPowerDerivative(const GridFunction& u, int j);

/// Sum over j <= k of ||(rho d/drho)^j u||_{L^p_delta} with the physical measure.
double weightedSobolevNorm(const GridFunction& u, const WeightSpec& w);

struct GsResult {
    double value = 0.0;
    std::vector<double> centers;
    std::vector<double> profile;  // rho_i^{-delta} times the local window norm
    std::vector<bool> clipped;
    bool unbounded = false;       // profile grows along the unclipped dyadic tail
};

GsResult gsNorm(const GridFunction& u, const WeightSpec& w, const MobiusCover& cover);

/// Sum over j <= m of ||rho^j d^j u||_{H^{k-j,p}_{j-n/p}}.
double fortifiedNormH(const GridFunction& u, const WeightSpec& w);

struct FortifiedXResult {
    double value = 0.0;
    std::vector<GsResult> terms;
    bool unbounded = false;
};

/// Sum over j <= m of the Gicquaud-Sakovich norm of rho^j d^j u with weight j.
FortifiedXResult fortifiedNormX(const GridFunction& u, const WeightSpec& w, const MobiusCover& cover);

struct DecayFit {
    double beta = 0.0;
    double r2 = 0.0;
    double rms = 0.0;  // residual of the log-log fit
    std::size_t points = 0;
};

/// Least-squares slope of log|u| against log rho over nodes with rho in [lo, hi].
DecayFit decayExponent(const GridFunction& u, double lo, double hi);

struct DivergenceCheck {
    std::vector<double> eps;
    std::vector<double> values;
    double maxRatio = 0.0;
    bool divergent = false;  // some consecutive ratio exceeds 1.5
};

/// Re-evaluates a norm of the analytic closure of u on grids truncated at each eps.
DivergenceCheck normDivergence(const GridFunction& u, const std::vector<double>& eps,
                               const std::function<double(const GridFunction&)>& norm);

/// Writes the per-window profile as rho, value.
void writeProfileCsv(const GsResult& gs, const std::string& path);

}  // namespace ahy
