#pragma once

#include "grid.hpp"
#include "metric.hpp"

namespace ahy {

/// Samples of the physical scalar curvature R[g] at the grid nodes.
GridFunction scalarCurvaturePhysical(const RadialMetric& m, const GridPtr& grid);

/// Predicted R[Theta^{q-2} g] = (-(q+2) Lap_g Theta + R[g] Theta) Theta^{1-q} with a sampled Theta.
GridFunction conformalScalarCurvature(const RadialMetric& m, const GridFunction& theta);
GridFunction conformalScalarCurvature(const RadialMetric& m, const ConformalFactor& theta, const GridPtr& grid);

/// R[omega^{-2} gbar] = Rbreve |d omega|^2 + 2(n-1) omega Lap_bar omega + omega^2 R[gbar].
GridFunction scalarCurvatureFromOmega(const RadialMetric& m, const GridFunction& omega);

}  // namespace ahy
