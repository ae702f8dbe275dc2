#include "run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "elliptic.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "mollify.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "cli";

std::string fmt17(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

class Csv {
public:
    Csv(const std::filesystem::path& path, const std::string& header) : f_(path) {
        if (!f_) raise(ErrorCode::Io, kModule, "cannot open " + path.string());
        f_ << header << "\n";
    }
    Csv& row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            f_ << (first ? "" : ",") << fmt17(v);
            first = false;
        }
        f_ << "\n";
        return *this;
    }
    std::ofstream& stream() { return f_; }

private:
    std::ofstream f_;
};

Json weightJson(const WeightSpec& w) {
    Json j;
    j["k"] = w.k;
    j["p"] = w.p;
    j["delta"] = w.delta;
    j["m"] = w.m ? Json(*w.m) : Json(nullptr);
    return j;
}

Json runCurvature(const RunConfig& cfg, const std::filesystem::path& dir) {
    const RadialMetric m = buildMetric(cfg.metric);
    const int n = m.n();
    const GridPtr grid = RadialGrid::build(n, cfg.grid);
    const double rb = -static_cast<double>(n) * (n - 1);
    const GridFunction R = scalarCurvaturePhysical(m, grid);
    const GridFunction Ro = scalarCurvatureFromOmega(m, sampleFunction(grid, [](double, double rho) { return rho; }));
    Csv csv(dir / "curvature.csv", "r,rho,R,R_plus_n_n_minus_1,R_omega,R_bar,grad_rho_sq,lap_bar_rho");
    double worst = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double r = grid->r()[i];
        csv.row({r, grid->rho()[i], R.values[i], R.values[i] - rb, Ro.values[i], scalarCurvatureCompactified(m, r),
                 gradRhoSquared(m, r), laplacianBarRho(m, r)});
        worst = std::max(worst, std::abs(R.values[i] - rb));
        if (i + 1 < grid->size()) gap = std::max(gap, std::abs(R.values[i] - Ro.values[i]));
    }
    Json j;
    j["family"] = cfg.metric.family;
    j["n"] = n;
    j["provenance"] = m.provenance();
    j["ah_defect"] = ahDefect(m);
    j["asymptotically_hyperbolic"] = std::abs(ahDefect(m)) <= 1e-8;
    j["max_abs_curvature_defect"] = worst;
    j["omega_formula_gap"] = gap;
    std::optional<double> decay;
    try {
        if (std::abs(ahDefect(m)) <= 1e-8) decay = curvatureDecay(m, grid, 2.0 * grid->eps(), 0.05);
    } catch (const Error&) {
    }
    j["curvature_defect_decay"] = optionalNumber(decay);
    return j;
}

Json runNorms(const RunConfig& cfg, const std::filesystem::path& dir) {
    const RadialMetric m = buildMetric(cfg.metric);
    const int n = m.n();
    const GridPtr grid = RadialGrid::build(n, cfg.grid);
    const MobiusCover cover = MobiusCover::build(grid->eps());
    std::vector<GridFunction> fns;
    for (double b : cfg.norms.exponents)
        fns.push_back(sampleFunction(grid, [b](double, double rho) { return std::pow(rho, b); }, "rho^" + fmt17(b)));
    if (cfg.norms.includeCurvature) {
        const double rb = -static_cast<double>(n) * (n - 1);
        fns.push_back(sampleFunction(grid, [m, rb](double r, double) { return scalarCurvaturePhysicalAt(m, r) - rb; },
                                     "curvature_defect"));
    }
    Csv table(dir / "norms.csv", "function,weight,k,p,delta,m,weighted,gs,gs_unbounded,fortified_h,fortified_x,fortified_x_unbounded");
    Csv prof(dir / "profiles.csv", "function,weight,rho,value");
    Json rows = Json::array();
    for (const GridFunction& u : fns) {
        for (std::size_t wi = 0; wi < cfg.weights.size(); ++wi) {
            const WeightSpec& w = cfg.weights[wi];
            const double ws = weightedSobolevNorm(u, w);
            const GsResult gs = gsNorm(u, w, cover);
            std::optional<double> fh, fx;
            bool fxu = false;
            if (w.m) {
                fh = fortifiedNormH(u, w);
                const FortifiedXResult x = fortifiedNormX(u, w, cover);
                fx = x.value;
                fxu = x.unbounded;
            }
            auto& s = table.stream();
            s << u.label << "," << wi << "," << w.k << "," << fmt17(w.p) << "," << fmt17(w.delta) << ","
              << (w.m ? std::to_string(*w.m) : "") << "," << fmt17(ws) << "," << fmt17(gs.value) << ","
              << (gs.unbounded ? 1 : 0) << "," << (fh ? fmt17(*fh) : "") << "," << (fx ? fmt17(*fx) : "") << ","
              << (fxu ? 1 : 0) << "\n";
            for (std::size_t i = 0; i < gs.centers.size(); ++i)
                prof.stream() << u.label << "," << wi << "," << fmt17(gs.centers[i]) << "," << fmt17(gs.profile[i]) << "\n";
            Json r;
            r["function"] = u.label;
            r["weight"] = weightJson(w);
            r["weighted_sobolev"] = ws;
            r["gicquaud_sakovich"] = gs.value;
            r["gs_unbounded_profile"] = gs.unbounded;
            r["fortified_h"] = optionalNumber(fh);
            r["fortified_x"] = optionalNumber(fx);
            rows.push_back(r);
        }
    }
    Json j;
    j["cover_windows"] = cover.windows.size();
    j["cover_multiplicity"] = cover.multiplicity(grid->eps());
    j["norms"] = rows;
    return j;
}

Json runFredholm(const RunConfig& cfg, const std::filesystem::path& dir, bool& ok) {
    const RadialMetric m = buildMetric(cfg.metric);
    const int n = m.n();
    const GridPtr grid = RadialGrid::build(n, cfg.grid);
    const std::vector<FredholmRow> rows = fredholmScan(m, grid, cfg.fredholm.lambdas, cfg.fredholm.deltas);
    writeFredholmCsv(rows, (dir / "fredholm.csv").string());
    Csv ex(dir / "exponents.csv", "lambda,indicial_radius,window_lo,window_hi,delta_minus,delta_plus");
    Json windows = Json::array();
    for (double lambda : cfg.fredholm.lambdas) {
        const double R = indicialRadius(lambda, n);
        Json w;
        w["lambda"] = lambda;
        w["indicial_radius"] = R;
        w["x_window"] = {0.5 * (n - 1) - R, 0.5 * (n - 1) + R};
        try {
            const ExponentPair e = homogeneousExponents(m, grid, lambda);
            w["delta_minus"] = e.deltaMinus;
            w["delta_plus"] = e.deltaPlus;
            ex.row({lambda, R, 0.5 * (n - 1) - R, 0.5 * (n - 1) + R, e.deltaMinus, e.deltaPlus});
        } catch (const Error& err) {
            ok = false;
            w["delta_minus"] = nullptr;
            w["delta_plus"] = nullptr;
            w["error"] = errorJson(err);
        }
        windows.push_back(w);
    }
    Json scan = Json::array();
    for (const FredholmRow& r : rows)
        scan.push_back({{"lambda", r.lambda}, {"delta", r.delta}, {"in_range_x", r.inRangeX}, {"in_range_h2", r.inRangeH},
                        {"fitted_exponent", r.fitted}, {"residual", r.residual}});
    Json j;
    j["n"] = n;
    j["exponents"] = windows;
    j["scan"] = scan;
    return j;
}

Json runYamabe(const RunConfig& cfg, const std::filesystem::path& dir, bool& ok) {
    const RadialMetric m = buildMetric(cfg.metric);
    YamabeConfig yc = cfg.yamabe;
    yc.grid = cfg.grid;
    yc.residualWeights = cfg.weights;
    const YamabeSolution sol = yamabeSolve(m, yc);
    const YamabeReport& r = sol.report;
    const GridPtr& grid = sol.theta.grid;
    {
        Csv t(dir / "theta.csv", "r,rho,theta");
        for (std::size_t i = 0; i < grid->size(); ++i) t.row({grid->r()[i], grid->rho()[i], sol.theta.values[i]});
        const GridFunction Rc = conformalScalarCurvature(m, sol.theta);
        Csv res(dir / "residual.csv", "r,rho,R_conformal_plus_n_n_minus_1");
        const double rb = Constants::of(m.n()).rBreve;
        for (std::size_t i = 0; i + 1 < grid->size(); ++i) res.row({grid->r()[i], grid->rho()[i], Rc.values[i] - rb});
        Csv it(dir / "iterations.csv", "iteration,delta,u_min,u_max");
        for (std::size_t k = 0; k < r.iterations.size(); ++k)
            it.row({static_cast<double>(k + 1), r.iterations[k].delta, r.iterations[k].uMin, r.iterations[k].uMax});
    }
    Json j = yamabeReportJson(sol, yc, m.n(), cfg.output.timing);
    ok = r.verify.passed;
    return j;
}

Json runMollify(const RunConfig& cfg, const std::filesystem::path& dir, bool& ok) {
    const MollifyBlock& mb = cfg.mollify;
    const Kernel psi(mb.kernelResolution);
    const double L = mb.period, w = 2.0 * M_PI / L;
    auto field = [&](const std::function<double(double, double)>& f) {
        return HalfSpaceField::sample(L, mb.nx, mb.yMin, mb.yMax, mb.ny, f);
    };
    Json j;
    double wsum = 0.0;
    for (double v : psi.weights()) wsum += v;
    j["kernel"] = {{"radius", psi.radius()}, {"nodes", psi.nodes().size()}, {"raw_mass", psi.rawMass()},
                   {"normalization", wsum}, {"moment_x", psi.momentX()}, {"moment_y", psi.momentY()}};

    const HalfSpaceField cst = hConvolve(field([](double, double) { return 1.0; }), psi);
    double cerr = 0.0;
    for (double v : cst.values()) cerr = std::max(cerr, std::abs(v - 1.0));
    j["constant_preservation_error"] = cerr;
    bool pass = cerr <= 1e-10;

    // Taylor expansion of a(x) + y b(x) + y^2 c(x).
    const int m = mb.taylorOrder;
    auto a = [w](double x) { return std::sin(w * x); };
    auto b = [w](double x) { return std::cos(2.0 * w * x); };
    auto c = [w](double x) { return 1.0 + 0.5 * std::sin(w * x); };
    const HalfSpaceField u = field([&](double x, double y) { return a(x) + y * b(x) + y * y * c(x); });
    const TaylorResult tr = taylorExpand(u, m, psi);
    Json traces = Json::array();
    for (int k = 0; k < m; ++k) {
        const std::vector<double> t = boundaryTrace(tr.terms[static_cast<std::size_t>(k)]);
        double err = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double x = u.x(i);
            const double exact = k == 0 ? a(x) : k == 1 ? b(x) : 2.0 * c(x);
            err = std::max(err, std::abs(t[i] - exact));
        }
        traces.push_back(err);
    }
    const double yTop = 0.05;
    const DecayFit rem = yDecay(tr.remainder, tr.remainder.y().front(), yTop);
    j["taylor"] = {{"m", m}, {"trace_errors", traces}, {"remainder_decay", rem.beta}, {"remainder_r2", rem.r2}};
    pass = pass && rem.beta >= m - 0.15;
    tr.remainder.writeCsv((dir / "taylor_remainder.csv").string());

    // Trace preservation: u * psi - u decays at least linearly for fields with a bounded y-derivative.
    // Hyperbolic-harmonic fields are reproduced exactly by the radial kernel, so the corpus avoids them.
    const std::vector<std::pair<std::string, std::function<double(double, double)>>> corpus{
        {"sin(x)+y", [w](double x, double y) { return std::sin(w * x) + y; }},
        {"cos(2x)(1+y)", [w](double x, double y) { return std::cos(2 * w * x) * (1 + y); }},
        {"exp(-y)cos(2x)", [w](double x, double y) { return std::exp(-y) * std::cos(2 * w * x); }},
        {"sin(x+y)", [w](double x, double y) { return std::sin(w * x + y); }},
        {"1/(2+cos(x)+y)", [w](double x, double y) { return 1.0 / (2.0 + std::cos(w * x) + y); }}};
    Json tp = Json::array();
    for (const auto& [name, f] : corpus) {
        const HalfSpaceField fu = field(f);
        const HalfSpaceField conv = hConvolve(fu, psi);
        HalfSpaceField d = conv;
        for (std::size_t jj = 0; jj < d.ny(); ++jj)
            for (std::size_t i = 0; i < d.nx(); ++i) d.at(i, jj) -= f(d.x(i), d.y()[jj]);
        const DecayFit fit = yDecay(d, d.y().front(), yTop);
        tp.push_back({{"function", name}, {"decay", fit.beta}});
        pass = pass && fit.beta >= 0.9;
    }
    j["trace_preservation"] = tp;

    // Support containment for a field supported in a box.
    const Box box{0.4 * L, 0.6 * L, 0.05, 0.2};
    const HalfSpaceField boxed = field([&](double x, double y) {
        if (x < box.x0 || x > box.x1 || y < box.y0 || y > box.y1) return 0.0;
        return std::sin(M_PI * (x - box.x0) / (box.x1 - box.x0)) * std::sin(M_PI * (y - box.y0) / (box.y1 - box.y0));
    });
    const HalfSpaceField bc = hConvolve(boxed, psi);
    const Box pb = productBox(box, psi);
    const double xPad = 2.0 * bc.dx(), yPad = std::exp(2.0 * bc.logStep());
    double outside = 0.0;
    for (std::size_t jj = 0; jj < bc.ny(); ++jj)
        for (std::size_t i = 0; i < bc.nx(); ++i) {
            const double x = bc.x(i), y = bc.y()[jj];
            const bool inside = x >= pb.x0 - xPad && x <= pb.x1 + xPad && y >= pb.y0 / yPad && y <= pb.y1 * yPad;
            if (!inside) outside = std::max(outside, std::abs(bc.at(i, jj)));
        }
    j["support_outside_max"] = outside;
    pass = pass && outside < 1e-12;

    // Smoothing of a rough field.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    HalfSpaceField rough = field([](double, double) { return 0.0; });
    for (std::size_t jj = 0; jj < rough.ny(); ++jj)
        for (std::size_t i = 0; i < rough.nx(); ++i) rough.at(i, jj) = unif(rng);
    const HalfSpaceField smooth = hConvolve(rough, psi);
    // Scaled by (y/dx)^2 the mollified second difference is bounded by C(psi) sup|u| for any u.
    const double smoothConst = hyperbolicSecondDifference(smooth) / rough.supAbs();
    j["smoothing"] = {{"raw_scaled_second_difference", hyperbolicSecondDifference(rough) / rough.supAbs()},
                      {"mollified_scaled_second_difference", smoothConst},
                      {"bound", kSmoothingBound},
                      {"sup", rough.supAbs()}};
    pass = pass && smoothConst <= kSmoothingBound;
    hConvolve(u, psi).writeCsv((dir / "mollified.csv").string());
    j["passed"] = pass;
    ok = pass;
    return j;
}

}  // namespace

Json yamabeReportJson(const YamabeSolution& sol, const YamabeConfig& yc, int n, bool timing) {
    const YamabeReport& r = sol.report;
    Json cond = Json::array();
    for (const ConditioningStep& s : r.conditioning)
        cond.push_back({{"k", s.k}, {"tau", s.tau}, {"coefficient", s.coefficient}, {"rho_cut", s.rhoCut},
                        {"skipped", s.skipped}, {"pre_decay", optionalNumber(s.preDecay)},
                        {"post_decay", optionalNumber(s.postDecay)}});
    Json j;
    j["n"] = n;
    j["conditioning"] = cond;
    j["lowering"] = {{"applied", r.loweringApplied}, {"max_excess", r.loweringExcess}, {"max_excess_after", r.loweringExcessAfter}};
    j["barrier"] = {{"K", r.barrierK}, {"c", r.barrierC}, {"supersolution_defect", r.barrierDefect}, {"alpha", yc.alpha}};
    j["lambda_required"] = r.lambdaRequired;
    j["lambda"] = r.lambda;
    Json deltas = Json::array();
    for (const IterationRecord& it : r.iterations) deltas.push_back(it.delta);
    j["iterations"] = r.iterations.size();
    j["iteration_deltas"] = deltas;
    j["max_contraction"] = r.maxContraction;
    j["fixed_point_residual"] = r.fixedPointResidual;
    Json weighted = Json::array();
    for (std::size_t i = 0; i < r.verify.weighted.size(); ++i)
        weighted.push_back({{"weight", weightJson(yc.residualWeights[i])}, {"value", r.verify.weighted[i]}});
    double thetaDev = 0.0;
    for (double t : sol.theta.values) thetaDev = std::max(thetaDev, std::abs(t - 1.0));
    j["verify"] = {{"residual_sup", r.verify.residualSup},
                   {"residual_omega_sup", r.verify.residualOmegaSup},
                   {"formula_gap", r.verify.formulaGap},
                   {"residual_target", yc.residualTarget},
                   {"weighted_residuals", weighted},
                   {"theta_minus_one_decay", r.verify.thetaDecay ? Json(r.verify.thetaDecay->beta) : Json(nullptr)},
                   {"theta_minus_one_sup", thetaDev},
                   {"passed", r.verify.passed}};
    if (timing) j["wall_seconds"] = r.wallSeconds;
    return j;
}

Json errorJson(const std::exception& e) {
    Json j;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        j["code"] = errorCodeName(err->code());
        j["module"] = err->module();
        j["stage"] = err->stage();
        j["message"] = err->detail();
    } else {
        j["code"] = "Internal";
        j["module"] = "";
        j["stage"] = "";
        j["message"] = e.what();
    }
    return j;
}

RunOutcome runCommand(const RunConfig& cfg, bool quiet) {
    RunOutcome out;
    Json& rep = out.report;
    rep["command"] = cfg.command;
    rep["seed"] = cfg.seed;
    rep["config"] = serializeConfig(cfg);
    const std::filesystem::path dir(cfg.output.dir);
    bool ok = true;
    try {
        const std::vector<std::string> problems = validateConfig(cfg);
        if (!problems.empty()) {
            std::string msg;
            for (const std::string& p : problems) msg += (msg.empty() ? "" : "\n") + p;
            raise(ErrorCode::Config, kModule, msg);
        }
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) raise(ErrorCode::Io, kModule, "cannot create output directory " + dir.string());
        Json result;
        if (cfg.command == "curvature") result = runCurvature(cfg, dir);
        else if (cfg.command == "norms") result = runNorms(cfg, dir);
        else if (cfg.command == "fredholm-scan") result = runFredholm(cfg, dir, ok);
        else if (cfg.command == "yamabe") result = runYamabe(cfg, dir, ok);
        else if (cfg.command == "mollify-demo") result = runMollify(cfg, dir, ok);
        else {
            const std::vector<SelftestCheck> checks = runSelftest(cfg.seed);
            Json list = Json::array();
            for (const SelftestCheck& c : checks) {
                list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
                ok = ok && c.passed;
                if (!quiet) std::fprintf(stderr, "[%s] %s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
            }
            result["checks"] = list;
        }
        rep["status"] = ok ? "ok" : "failed";
        rep["result"] = result;
        out.exitStatus = ok ? kExitOk : kExitCheckFailed;
    } catch (const Error& e) {
        rep["status"] = "error";
        rep["error"] = errorJson(e);
        out.exitStatus = e.code() == ErrorCode::Config ? kExitConfigError
                         : e.code() == ErrorCode::Io   ? kExitIoError
                                                       : kExitRuntimeError;
        if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
    } catch (const std::exception& e) {
        rep["status"] = "error";
        rep["error"] = errorJson(e);
        out.exitStatus = kExitRuntimeError;
        if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
    }
    rep["exit_status"] = out.exitStatus;
    if (out.exitStatus != kExitIoError && out.exitStatus != kExitConfigError) {
        std::ofstream f(dir / "report.json");
        if (!f) {
            out.exitStatus = kExitIoError;
        } else {
            f << dumpJson(rep);
        }
    } else {
        std::error_code ec;
        if (std::filesystem::create_directories(dir, ec), !ec) {
            std::ofstream f(dir / "report.json");
            if (f) f << dumpJson(rep);
        }
    }
    if (!quiet && out.exitStatus == kExitOk) std::fprintf(stderr, "%s: ok (%s)\n", cfg.command.c_str(), (dir / "report.json").c_str());
    return out;
}

}  // namespace ahy
