#include "geometry.hpp"

#include <cmath>

#include "errors.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "geometry";
}

GridFunction scalarCurvaturePhysical(const RadialMetric& m, const GridPtr& grid) {
    if (m.n() != grid->dimension()) raise(ErrorCode::Dimension, kModule, "metric and grid dimensions differ");
    GridFunction out{grid, std::vector<double>(grid->size()), "R[g]", {}};
    for (std::size_t i = 0; i < grid->size(); ++i) out.values[i] = scalarCurvaturePhysicalAt(m, grid->r()[i]);
    return out;
}

GridFunction conformalScalarCurvature(const RadialMetric& m, const GridFunction& theta) {
    const Constants k = Constants::of(m.n());
    for (double t : theta.values)
        if (!(t > 0.0)) raise(ErrorCode::Positivity, kModule, "conformal factor must be positive on the grid");
    const GridFunction R = scalarCurvaturePhysical(m, theta.grid);
    const RadialLaplacian lap(m, theta.grid, Measure::Physical);
    const std::vector<double> lapTheta = lap.apply(theta.values);
    GridFunction out{theta.grid, std::vector<double>(theta.size()), "R[theta^(q-2) g]", {}};
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double t = theta.values[i];
        out.values[i] = (-k.a * lapTheta[i] + R.values[i] * t) * std::pow(t, 1.0 - k.q);
    }
    return out;
}

GridFunction conformalScalarCurvature(const RadialMetric& m, const ConformalFactor& theta, const GridPtr& grid) {
    return conformalScalarCurvature(m, sampleFunction(grid, [theta](double, double rho) { return theta(rho); }, "theta"));
}

GridFunction scalarCurvatureFromOmega(const RadialMetric& m, const GridFunction& omega) {
    const int n = m.n();
    const GridPtr& grid = omega.grid;
    if (n != grid->dimension()) raise(ErrorCode::Dimension, kModule, "metric and grid dimensions differ");
    for (double w : omega.values)
        if (!(w > 0.0)) raise(ErrorCode::Positivity, kModule, "omega must be positive in the interior");
    const double rBreve = -static_cast<double>(n) * (n - 1);
    const RadialLaplacian lapBar(m, grid, Measure::Compactified);
    const std::vector<double> lap = lapBar.apply(omega.values);
    const GridFunction d1 = differentiate(omega, 1, Coordinate::R);
    GridFunction out{grid, std::vector<double>(grid->size()), "R[omega^-2 gbar]", {}};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double r = grid->r()[i];
        const double w = omega.values[i];
        const double grad2 = d1.values[i] * d1.values[i] / m.sample(r).a.v;
        out.values[i] = rBreve * grad2 + 2.0 * (n - 1.0) * w * lap[i] + w * w * scalarCurvatureCompactified(m, r);
    }
    return out;
}

}  // namespace ahy
