#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ahy/ahy.h"

namespace {

constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;

int report(ahy_status s, int code) {
    std::fprintf(stderr, "error (%s): %s\n", ahy_status_name(s), ahy_last_error());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotically hyperbolic Yamabe toolkit"};
    std::string command, configPath, outDir;
    std::uint64_t seed = 0;
    std::size_t gridN = 0;
    bool quiet = false;
    app.add_option("command", command, "curvature | norms | fredholm-scan | yamabe | mollify-demo | selftest");
    app.add_option("--config", configPath, "configuration document")->check(CLI::ExistingFile);
    app.add_option("--out", outDir, "output directory (overrides the config)");
    auto* seedOpt = app.add_option("--seed", seed, "random seed for generated corpora");
    app.add_option("--grid-N", gridN, "grid size override")->check(CLI::Range(std::size_t{16}, std::size_t{1} << 22));
    app.add_flag("--quiet", quiet, "suppress progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    if (command.empty() && configPath.empty()) {
        std::fprintf(stderr, "error: give a command or --config\n%s", app.help().c_str());
        return kExitConfig;
    }

    ahy_config* cfg = nullptr;
    ahy_status s;
    if (!configPath.empty()) {
        std::ifstream in(configPath);
        if (!in) {
            std::fprintf(stderr, "error: cannot read %s\n", configPath.c_str());
            return kExitIo;
        }
        std::ostringstream text;
        text << in.rdbuf();
        s = ahy_config_parse(text.str().c_str(), &cfg);
    } else {
        s = ahy_config_default(command.c_str(), &cfg);
    }
    if (s != AHY_OK) return report(s, kExitConfig);

    if (!command.empty() && (s = ahy_config_set_command(cfg, command.c_str())) != AHY_OK) return report(s, kExitConfig);
    if (!outDir.empty()) ahy_config_set_out_dir(cfg, outDir.c_str());
    if (*seedOpt) ahy_config_set_seed(cfg, seed);
    if (gridN) ahy_config_set_grid_n(cfg, gridN);

    int exitStatus = 0;
    s = ahy_run(cfg, quiet ? 1 : 0, &exitStatus, nullptr);
    ahy_config_destroy(cfg);
    if (s != AHY_OK) return report(s, 2);
    return exitStatus;
}
