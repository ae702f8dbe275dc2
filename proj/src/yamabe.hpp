#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fspaces.hpp"
#include "grid.hpp"
#include "metric.hpp"

namespace ahy {

struct YamabeConfig {
    GridSpec grid;
    /// Requested decay order of R + n(n-1) after conditioning; at most n - 1.
    int targetOrder = 1;
    double alpha = 0.5;
    double tol = 1e-10;
    int maxIter = 200;
    double lambdaMargin = 0.1;
    double rhoCut = 0.2;
    std::optional<double> lambdaOverride;
    /// Gate on sup |R[Theta^{q-2} g] + n(n-1)| over rho > 10 eps.
    double residualTarget = 1e-6;
    std::vector<WeightSpec> residualWeights;

    void validate(int n) const;
    bool operator==(const YamabeConfig&) const = default;
};

struct ConditioningStep {
    int k = 0;
    double tau = 0.0;
    double coefficient = 0.0;  // u = tau / (2(k+1)(n-1)(n-k))
    double rhoCut = 0.0;
    bool skipped = false;
    std::optional<double> preDecay, postDecay;  // empty when R + n(n-1) vanishes on the fit window
};

struct ConditioningResult {
    RadialMetric metric;
    /// Accumulated factor Theta in the Theta^{q-2} convention relative to the input.
    GridFunction theta;
    std::vector<ConditioningStep> log;
};

/// tau = lim rho^{-k}(R - Rbreve), by a cubic least-squares fit on [2 eps, 0.05].
double fitCorrectionCoefficient(const RadialMetric& m, const GridPtr& grid, int k);

/// One explicit correction of order k: metric Theta_c^{-2} g with Theta_c = 1 + eta rho^k u.
ConditioningStep conditioningStep(const RadialMetric& m, const GridPtr& grid, int k, double rhoCut,
                                  RadialMetric& out, std::optional<ConformalFactor>& factor);

ConditioningResult conditionAtInfinity(const RadialMetric& m, int targetOrder, const GridPtr& grid,
                                       const YamabeConfig& cfg);

/// Fitted decay of R + n(n-1) on [lo, hi]; empty if the curvature defect vanishes there.
std::optional<double> curvatureDecay(const RadialMetric& m, const GridPtr& grid, double lo, double hi);

/// Discrete state: the finite-volume operator of the current metric and its scalar curvature at the nodes.
struct DiscreteState {
    RadialLaplacian lap;
    std::vector<double> R;
};

DiscreteState discreteState(const RadialMetric& m, const GridPtr& grid);
/// State of Theta^{q-2} g given the state of g (exact discrete conformal change).
DiscreteState conformalState(const DiscreteState& s, const std::vector<double>& theta, int n);

struct LoweringResult {
    bool applied = false;
    double maxExcess = 0.0;        // max (R - Rbreve)_+ before
    double maxExcessAfter = 0.0;   // max (R - Rbreve) after, interior nodes
    std::vector<double> theta;     // Theta_L = 1 + u
    DiscreteState state;
};

/// Solves (-a_n Lap + V) u = -V with V dominating (R - Rbreve)_+ and changes conformally by 1 + u.
LoweringResult lowerScalarCurvature(const DiscreteState& s, int n);

struct BarrierPair {
    std::vector<double> lower;  // identically 0
    std::vector<double> upper;  // K v
    std::vector<double> v;
    double K = 0.0;
    double c = 0.0;             // min v / rho^alpha over interior nodes
    double supersolutionDefect = 0.0;  // max (F(Kv) - a_n(-Lap)(Kv)) over interior nodes
};

BarrierPair buildUpperBarrier(const DiscreteState& s, int n, double alpha);
BarrierPair buildUpperBarrier(const RadialMetric& m, const GridPtr& grid, double alpha);

/// F(z) = Rbreve (1+z)^{q-1} - R (1+z).
double yamabeF(double z, double R, const Constants& k);
/// F(z) + Lambda z written to avoid cancellation when R is close to Rbreve.
double yamabeFLambda(double z, double R, double lambda, const Constants& k);

/// (1 + margin) sup over z in [0, max u+] and nodes of -F'(z).
double lambdaForMonotonicity(const std::vector<double>& R, const std::vector<double>& upper, int n,
                             double margin = 0.1);
double lambdaForMonotonicity(const RadialMetric& m, const GridPtr& grid, const std::vector<double>& upper,
                             double margin = 0.1);

struct IterationRecord {
    double delta;
    double uMin, uMax;
};

struct IterationResult {
    std::vector<double> u;
    std::vector<IterationRecord> trace;
    double fixedPointResidual = 0.0;
    double maxContraction = 0.0;  // max delta_k / delta_{k-1} from the second iteration on
};

IterationResult monotoneIterate(const DiscreteState& s, int n, double lambda, const BarrierPair& barriers,
                                double tol, int maxIter);

struct VerifyReport {
    double residualSup = 0.0;       // conformal formula on the input operator
    double residualOmegaSup = 0.0;  // compactified omega formula
    double formulaGap = 0.0;        // max difference of the two curvature formulas
    std::vector<double> weighted;   // weightedSobolevNorm of R + n(n-1) per residual weight
    std::optional<DecayFit> thetaDecay;
    bool passed = false;
};

VerifyReport verifySolution(const RadialMetric& m, const GridFunction& theta, const YamabeConfig& cfg);

struct YamabeReport {
    std::vector<ConditioningStep> conditioning;
    bool loweringApplied = false;
    double loweringExcess = 0.0, loweringExcessAfter = 0.0;
    double barrierK = 0.0, barrierC = 0.0, barrierDefect = 0.0;
    double lambdaRequired = 0.0, lambda = 0.0;
    std::vector<IterationRecord> iterations;
    double maxContraction = 0.0;
    double fixedPointResidual = 0.0;
    VerifyReport verify;
    double wallSeconds = 0.0;
};

struct YamabeSolution {
    GridFunction theta;
    YamabeReport report;
};

YamabeSolution yamabeSolve(const RadialMetric& m, const YamabeConfig& cfg);

}  // namespace ahy
