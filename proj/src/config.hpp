#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fspaces.hpp"
#include "grid.hpp"
#include "metric.hpp"
#include "yamabe.hpp"

namespace ahy {

struct MetricBlock {
    std::string family = "hyperbolic";
    int n = 3;
    std::vector<double> params;

    bool operator==(const MetricBlock&) const = default;
};

struct FredholmBlock {
    std::vector<double> lambdas{0.0, 3.0};
    std::vector<double> deltas{-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};

    bool operator==(const FredholmBlock&) const = default;
};

struct NormsBlock {
    /// Test functions rho^beta.
    std::vector<double> exponents{0.5, 1.0, 1.5};
    bool includeCurvature = true;

    bool operator==(const NormsBlock&) const = default;
};

struct MollifyBlock {
    double period = 6.283185307179586;
    std::size_t nx = 256;
    std::size_t ny = 97;
    double yMin = 1e-3;
    double yMax = 1.0;
    std::size_t kernelResolution = 40;
    int taylorOrder = 2;

    bool operator==(const MollifyBlock&) const = default;
};

struct OutputBlock {
    std::string dir = "out";
    bool timing = false;

    bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
    std::string command = "curvature";
    std::uint64_t seed = 0;
    MetricBlock metric;
    GridSpec grid;
    std::vector<WeightSpec> weights{WeightSpec{0, 2.0, 0.0, std::nullopt}};
    YamabeConfig yamabe;
    FredholmBlock fredholm;
    NormsBlock norms;
    MollifyBlock mollify;
    OutputBlock output;

    bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& knownCommands() {
    static const std::vector<std::string> c{"curvature", "norms", "fredholm-scan", "yamabe", "mollify-demo", "selftest"};
    return c;
}

/// Parses the documented TOML subset. Throws Error(Config) listing every field-level problem.
RunConfig parseConfig(const std::string& text);
/// Field-level validation; returns one message per problem.
std::vector<std::string> validateConfig(const RunConfig& cfg);
/// Canonical document that parses back to an equal RunConfig.
std::string serializeConfig(const RunConfig& cfg);

/// Metric described by the metric block.
RadialMetric buildMetric(const MetricBlock& b);

}  // namespace ahy
