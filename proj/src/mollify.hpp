#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fspaces.hpp"

namespace ahy {

/// Point (x, y) of the upper half-plane, y > 0.
struct HPoint {
    double x, y;
};

/// (xi, eta) . (x, y) = (xi + eta x, eta y).
HPoint groupMul(const HPoint& z, const HPoint& w);
HPoint groupInv(const HPoint& z);
/// Hyperbolic distance in the half-plane.
double hyperbolicDistance(const HPoint& a, const HPoint& b);

/**
 * Samples u(x_i, y_j): x uniform and periodic on [0, L), y geometric on [yMin, yMax].
 * Values are stored row-major by y level.
 */
class HalfSpaceField {
public:
    HalfSpaceField(double period, std::size_t nx, double yMin, double yMax, std::size_t ny);
    static HalfSpaceField sample(double period, std::size_t nx, double yMin, double yMax, std::size_t ny,
                                 const std::function<double(double x, double y)>& f);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return y_.size(); }
    double period() const { return period_; }
    double dx() const { return period_ / static_cast<double>(nx_); }
    double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
    const std::vector<double>& y() const { return y_; }
    double logStep() const { return logStep_; }

    double& at(std::size_t i, std::size_t j) { return v_[j * nx_ + i]; }
    double at(std::size_t i, std::size_t j) const { return v_[j * nx_ + i]; }
    const std::vector<double>& values() const { return v_; }

    /// Levels j0..j1 (inclusive) as a new field.
    HalfSpaceField levels(std::size_t j0, std::size_t j1) const;
    /// Cubic Lagrange interpolation: periodic in x, in log y (clamped stencils).
    double interpolate(double x, double y) const;
    double supAbs() const;

    void writeCsv(const std::string& path) const;

private:
    HalfSpaceField() = default;
    double period_ = 1.0;
    std::size_t nx_ = 0;
    std::vector<double> y_;
    double logStep_ = 0.0;
    std::vector<double> v_;
};

HalfSpaceField operator-(const HalfSpaceField& a, const HalfSpaceField& b);

/**
 * psi(w) proportional to exp(-1/(1 - (d/r)^2)) with d the hyperbolic distance to (0, 1) and
 * r = 1/4, discretized by midpoint quadrature in (xi, log eta) with weights normalized to 1.
 */
class Kernel {
public:
    explicit Kernel(std::size_t resolution = 48, double radius = 0.25);

    double radius() const { return radius_; }
    double psi(const HPoint& w) const;
    const std::vector<HPoint>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    /// Sum of weights before normalization (the raw integral of psi).
    double rawMass() const { return rawMass_; }
    double momentX() const;
    double momentY() const;

private:
    double radius_;
    std::vector<HPoint> nodes_;
    std::vector<double> weights_;
    double rawMass_ = 0.0;
};

/// (u * psi)(z) = sum_q w_q u(z . w_q), on the levels whose kernel support stays inside the field.
HalfSpaceField hConvolve(const HalfSpaceField& u, const Kernel& psi);

/// Box [x0, x1] x [y0, y1] and its product with the kernel support.
struct Box {
    double x0, x1, y0, y1;
};
Box productBox(const Box& b, const Kernel& psi);

/// k-th y-derivative (k <= 3) by 5-point stencils on the geometric y grid.
HalfSpaceField yDerivative(const HalfSpaceField& u, int k);

/// S_k(u) = sum_{j<k} (-1)^j y^j / j! d_y^j u.
HalfSpaceField sOperator(const HalfSpaceField& u, int k);

/// Boundary trace at y = 0 by quadratic extrapolation from the three smallest levels.
std::vector<double> boundaryTrace(const HalfSpaceField& u);

struct TaylorResult {
    std::vector<HalfSpaceField> terms;   // u_0 .. u_{m-1}
    std::vector<bool> zeroed;           // term replaced by 0 because its trace vanished
    HalfSpaceField remainder;            // u - sum y^k/k! u_k on the valid levels
};

/// u_k = S_{m-k}((d_y^k u) * psi), remainder u - P_{m-1}[u].
TaylorResult taylorExpand(const HalfSpaceField& u, int m, const Kernel& psi, double traceTol = 1e-6);

/// Slope of log max_x |u| against log y over the levels in [yLo, yHi].
DecayFit yDecay(const HalfSpaceField& u, double yLo, double yHi);

/// C(psi) for the default kernel, measured once and frozen; hyperbolicSecondDifference(u * psi) <= C sup|u|.
inline constexpr double kSmoothingBound = 60.0;

/// Largest undivided second x-difference.
double maxSecondDifference(const HalfSpaceField& u);
/// Largest second x-difference in hyperbolic units, |u_{i+1} - 2u_i + u_{i-1}| (y/dx)^2.
double hyperbolicSecondDifference(const HalfSpaceField& u);

}  // namespace ahy
