#pragma once

#include <string>
#include <vector>

#include "fspaces.hpp"
#include "grid.hpp"
#include "metric.hpp"

namespace ahy {

/// Condition at the truncation node rho = eps.
struct OuterCondition {
    enum class Kind { Dirichlet, Decay };
    Kind kind = Kind::Dirichlet;
    double value = 0.0;  // Dirichlet value
    double beta = 0.0;   // u_{N-1} = (rho_{N-1}/rho_{N-2})^beta u_{N-2}

    static OuterCondition dirichlet(double v) { return {Kind::Dirichlet, v, 0.0}; }
    static OuterCondition decay(double b) { return {Kind::Decay, 0.0, b}; }
};

/// (-Lap_g + Lambda) u = f with regularity at the center and the given outer condition.
struct EllipticProblem {
    RadialMetric metric;
    double lambda = 0.0;
    GridFunction f;
    OuterCondition outer;
};

/// Solves (-c Lap + V) u = f on the finite-volume operator, rows pointwise, by the Thomas algorithm.
/// Rows 0..N-2 carry the equation; row N-1 carries the outer condition.
std::vector<double> solveOperator(const RadialLaplacian& lap, double diffusion, const std::vector<double>& potential,
                                  const std::vector<double>& rhs, const OuterCondition& outer);

/// Interior residual sup |(-c Lap + V) u - f| over rows 0..N-2.
double operatorResidual(const RadialLaplacian& lap, double diffusion, const std::vector<double>& potential,
                        const std::vector<double>& rhs, const std::vector<double>& u);

GridFunction solveShifted(const EllipticProblem& prob);

double indicialRadius(double lambda, int n);
bool fredholmRangeH(double delta, double q, int n, double R);
bool fredholmRangeX(double delta, int n, double R);
/// Membership of (sigma, q) in the admissible index set for (s, p, d).
bool compatibleIndices(double s, double p, int d, double sigma, double q, int n);
/// The index set for (s, p, d) is nonempty exactly when this holds.
bool weakL2Condition(double s, double p, int d, int n);

struct ExponentPair {
    double deltaMinus = 0.0, deltaPlus = 0.0;
    double r2Minus = 0.0, r2Plus = 0.0;
};

/// Characteristic exponents of -Lap_g + Lambda from two shooting solutions of the homogeneous equation.
ExponentPair homogeneousExponents(const RadialMetric& m, const GridPtr& grid, double lambda);

struct FredholmRow {
    double lambda, delta;
    bool inRangeX, inRangeH;
    double fitted, residual;
};

/// Solves (-Lap + Lambda) u = rho^delta for each pair and fits the decay of the solution.
std::vector<FredholmRow> fredholmScan(const RadialMetric& m, const GridPtr& grid, const std::vector<double>& lambdas,
                                      const std::vector<double>& deltas);

void writeFredholmCsv(const std::vector<FredholmRow>& rows, const std::string& path);

}  // namespace ahy
