#pragma once

#include <string>

#include "config.hpp"
#include "report.hpp"
#include "yamabe.hpp"

namespace ahy {

enum ExitStatus : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitRuntimeError = 2,
    kExitConfigError = 3,
    kExitIoError = 4,
};

struct RunOutcome {
    int exitStatus = kExitOk;
    Json report;
};

/// Runs the configured subcommand, writing report.json and CSV artifacts to cfg.output.dir.
RunOutcome runCommand(const RunConfig& cfg, bool quiet = true);

/// Report block for a Yamabe solve; wall time only when timing is set.
Json yamabeReportJson(const YamabeSolution& sol, const YamabeConfig& cfg, int n, bool timing);

/// Error record used in reports.
Json errorJson(const std::exception& e);

struct SelftestCheck {
    std::string name;
    bool passed;
    std::string detail;
};

/// Fast invariant battery across all modules.
std::vector<SelftestCheck> runSelftest(std::uint64_t seed);

}  // namespace ahy
