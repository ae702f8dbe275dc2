#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "metric.hpp"

namespace ahy {

enum class Grading { Uniform, Geometric };

/// 2^{-1/8}: consecutive tail ratio of rho at the reference resolution N = 512.
inline constexpr double kDefaultTailRatio = 0.91700404320467122;

struct GridSpec {
    std::size_t N = 512;
    Grading grading = Grading::Geometric;
    double epsTrunc = 1e-4;
    /// Tail ratio of consecutive rho values at N = 512. Other resolutions use
    /// tailRatio^{511/(N-1)}, so the node map is independent of N.
    double tailRatio = kDefaultTailRatio;

    bool operator==(const GridSpec&) const = default;
};

/// Position and Jacobian of the grid map at index coordinate x in [0, 1].
struct MapPoint {
    double r;
    double s;     // 1 - r, computed without cancellation
    double rho;
    double drdx;
};

/**
 * Graded radial grid r_0 = 0 < ... < r_{N-1} = 1 - eps. Nodes are images of the uniform
 * index coordinate x_i = i/(N-1) under a smooth map, so midpoints and quadrature points
 * in x are available for the finite-volume operators.
 */
class RadialGrid {
public:
    static std::shared_ptr<const RadialGrid> build(int n, const GridSpec& spec);

    int dimension() const { return n_; }
    std::size_t size() const { return r_.size(); }
    const GridSpec& spec() const { return spec_; }
    double eps() const { return spec_.epsTrunc; }
    double rhoMin() const { return rho_.back(); }

    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& s() const { return s_; }
    const std::vector<double>& rho() const { return rho_; }
    /// dr/dx at the nodes.
    const std::vector<double>& drdx() const { return drdx_; }

    double dx() const { return 1.0 / static_cast<double>(size() - 1); }
    double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
    MapPoint map(double x) const;

    /// First node of the exactly geometric tail (size() for uniform grading).
    std::size_t tailStart() const { return tailStart_; }
    /// Per-node rho ratio on the geometric tail.
    double tailRatio() const;

    /// r_j - r_i without cancellation near the boundary.
    double rDiff(std::size_t i, std::size_t j) const;

private:
    RadialGrid() = default;

    int n_ = 0;
    GridSpec spec_;
    std::vector<double> r_, s_, rho_, drdx_;
    std::size_t tailStart_ = 0;
    // geometric map parameters
    double rate_ = 0.0;     // tail slope L of -log(rho) per unit x
    double zetaMax_ = 0.0;  // -log(rho_min)
    double kappa_ = 1.0;    // interior dr/dx
    double xa_ = 2.0, xb_ = 2.0;  // blend window in x
    double zetaA_ = 0.0;    // -log(rho) at xa
    std::vector<double> blendTable_;  // cumulative integral of (1-beta)(1-tau) over the window

    bool fitGeometricMap();
    double blendSlope(double x) const;
    double blendDeficit(double x) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr buildGrid(int n, std::size_t N, Grading grading, double epsTrunc, double tailRatio = kDefaultTailRatio);

/**
 * Field sampled on a grid. The optional closure is the analytic form (in r and rho),
 * kept so refinement studies can resample the same field on other grids.
 */
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;
    std::string label;
    std::function<double(double r, double rho)> closure;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

GridFunction sampleFunction(const GridPtr& grid, std::function<double(double r, double rho)> f,
                            std::string label = {});
GridFunction makeGridFunction(const GridPtr& grid, std::vector<double> values, std::string label = {});
/// Re-evaluates the analytic closure on another grid.
GridFunction resample(const GridFunction& u, const GridPtr& grid);

enum class Coordinate { R, Rho };

/// First or second derivative by nonuniform 3-point stencils (one-sided at the ends).
GridFunction differentiate(const GridFunction& u, int order, Coordinate coordinate = Coordinate::R);

enum class Measure { Physical, Compactified };

/**
 * Conservative finite-volume Laplacian for radial functions:
 * (Lap u)_i = [K_{i+1/2}(u_{i+1} - u_i) - K_{i-1/2}(u_i - u_{i-1})] / M_i,
 * with M_i the exact cell measure and K the edge conductances. Zero flux at the center.
 * The operator is an M-matrix and exactly covariant under discrete conformal changes.
 */
class RadialLaplacian {
public:
    RadialLaplacian(const RadialMetric& m, GridPtr grid, Measure measure = Measure::Physical);

    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& mass() const { return mass_; }
    const std::vector<double>& conductance() const { return cond_; }

    /// Lap u at interior node i (0 <= i < N-1).
    double applyAt(const std::vector<double>& u, std::size_t i) const;
    /// Lap u at all nodes; the truncation node is filled by quadratic extrapolation.
    std::vector<double> apply(const std::vector<double>& u) const;

    /// Operator of Theta^{q-2} g given the operator of g.
    RadialLaplacian conformallyChanged(const std::vector<double>& theta, double q) const;

private:
    RadialLaplacian() = default;

    GridPtr grid_;
    std::vector<double> mass_;
    std::vector<double> cond_;
};

/// Lap_g u for the physical metric g = rho^{-2} gbar.
GridFunction laplaceBeltrami(const RadialMetric& m, const GridFunction& u);

/// Volume of the unit sphere S^{n-1}.
double sphereVolume(int n);

/**
 * (integral |rho^{-delta} u|^p dV)^{1/p} over the truncated ball, with the hyperbolic
 * reference volume (physical) or its compactification. Trapezoid rule in the index coordinate.
 */
double quadratureWeighted(const GridFunction& u, double p, double delta, Measure measure = Measure::Physical);

/// Writes columns r, rho, value with 17 significant digits.
void writeCsv(const GridFunction& u, const std::string& path);

/// Finite-difference weights at z for the given nodes (Fornberg), derivative order m.
std::vector<double> fornbergWeights(double z, const std::vector<double>& nodes, int m);

}  // namespace ahy
