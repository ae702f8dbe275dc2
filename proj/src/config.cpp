#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <type_traits>
#include <variant>
#include <algorithm>

#include "errors.hpp"

namespace ahy {

namespace {
constexpr const char* kModule = "cli";

struct Value;
using Array = std::vector<Value>;
struct Value {
    std::variant<bool, long long, double, std::string, Array> v;
    int line = 0;
};

using Table = std::map<std::string, Value>;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool bareKey(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

class Parser {
public:
    Parser(const std::string& text, std::vector<std::string>& errors) : errors_(errors) {
        std::istringstream in(text);
        std::string line;
        std::string table;
        tables_[""];
        int lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            const std::string body = trim(stripComment(line));
            if (body.empty()) continue;
            if (body.front() == '[') {
                if (body.back() != ']' || !bareKey(trim(body.substr(1, body.size() - 2)))) {
                    fail(lineNo, "malformed table header");
                    continue;
                }
                table = trim(body.substr(1, body.size() - 2));
                if (seenTables_.count(table)) fail(lineNo, "duplicate table [" + table + "]");
                seenTables_.insert({table, true});
                tables_[table];
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos) {
                fail(lineNo, "expected key = value");
                continue;
            }
            const std::string key = trim(body.substr(0, eq));
            if (!bareKey(key)) {
                fail(lineNo, "invalid key '" + key + "'");
                continue;
            }
            std::size_t pos = 0;
            const std::string rhs = trim(body.substr(eq + 1));
            Value v;
            if (!parseValue(rhs, pos, v, lineNo)) continue;
            if (trim(rhs.substr(pos)).size()) {
                fail(lineNo, "trailing characters after value");
                continue;
            }
            v.line = lineNo;
            if (tables_[table].count(key)) fail(lineNo, "duplicate key '" + key + "'");
            tables_[table][key] = v;
        }
    }

    std::map<std::string, Table>& tables() { return tables_; }

private:
    std::vector<std::string>& errors_;
    std::map<std::string, Table> tables_;
    std::map<std::string, bool> seenTables_;

    void fail(int line, const std::string& msg) { errors_.push_back("line " + std::to_string(line) + ": " + msg); }

    static std::string stripComment(const std::string& s) {
        bool inString = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) inString = !inString;
            if (s[i] == '#' && !inString) return s.substr(0, i);
        }
        return s;
    }

    bool parseValue(const std::string& s, std::size_t& pos, Value& out, int line) {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos >= s.size()) {
            fail(line, "missing value");
            return false;
        }
        const char c = s[pos];
        if (c == '"') {
            std::string str;
            ++pos;
            while (pos < s.size() && s[pos] != '"') {
                if (s[pos] == '\\' && pos + 1 < s.size()) {
                    const char e = s[++pos];
                    str += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                } else {
                    str += s[pos];
                }
                ++pos;
            }
            if (pos >= s.size()) {
                fail(line, "unterminated string");
                return false;
            }
            ++pos;
            out.v = str;
            return true;
        }
        if (c == '[') {
            ++pos;
            Array arr;
            for (;;) {
                while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
                if (pos < s.size() && s[pos] == ']') {
                    ++pos;
                    break;
                }
                Value item;
                if (!parseValue(s, pos, item, line)) return false;
                if (std::holds_alternative<Array>(item.v)) {
                    fail(line, "nested arrays are not supported");
                    return false;
                }
                arr.push_back(item);
                while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (pos < s.size() && s[pos] == ']') {
                    ++pos;
                    break;
                }
                fail(line, "expected ',' or ']' in array");
                return false;
            }
            const bool strings = !arr.empty() && std::holds_alternative<std::string>(arr.front().v);
            for (const Value& it : arr)
                if (std::holds_alternative<std::string>(it.v) != strings || std::holds_alternative<bool>(it.v)) {
                    fail(line, "arrays must be homogeneous lists of numbers or strings");
                    return false;
                }
            out.v = arr;
            return true;
        }
        std::size_t end = pos;
        while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != ' ' && s[end] != '\t') ++end;
        const std::string tok = s.substr(pos, end - pos);
        pos = end;
        if (tok == "true" || tok == "false") {
            out.v = tok == "true";
            return true;
        }
        const bool isFloat = tok.find_first_of(".eEn") != std::string::npos;
        try {
            std::size_t used = 0;
            if (isFloat) {
                const double d = std::stod(tok, &used);
                if (used != tok.size() || !std::isfinite(d)) throw std::invalid_argument(tok);
                out.v = d;
            } else {
                const long long i = std::stoll(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                out.v = i;
            }
        } catch (const std::exception&) {
            fail(line, "cannot parse value '" + tok + "'");
            return false;
        }
        return true;
    }
};

// Typed readers that record errors instead of throwing.
class Reader {
public:
    Reader(std::map<std::string, Table>& t, std::vector<std::string>& e) : tables_(t), errors_(e) {}

    template <class T>
    void read(const std::string& table, const std::string& key, T& dst) {
        auto* v = find(table, key);
        if (!v) return;
        convert(*v, dst, where(table, key));
    }

    bool has(const std::string& table, const std::string& key) { return find(table, key) != nullptr; }

    void checkUnknown(const std::map<std::string, std::vector<std::string>>& allowed) {
        for (auto& [name, tbl] : tables_) {
            const auto it = allowed.find(name);
            if (it == allowed.end()) {
                errors_.push_back("unknown table [" + name + "]");
                continue;
            }
            for (auto& [key, v] : tbl)
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                    errors_.push_back(where(name, key) + ": unknown key");
        }
    }

private:
    std::map<std::string, Table>& tables_;
    std::vector<std::string>& errors_;

    static std::string where(const std::string& t, const std::string& k) { return t.empty() ? k : t + "." + k; }

    Value* find(const std::string& table, const std::string& key) {
        auto t = tables_.find(table);
        if (t == tables_.end()) return nullptr;
        auto k = t->second.find(key);
        return k == t->second.end() ? nullptr : &k->second;
    }

    void bad(const std::string& w, const char* what) { errors_.push_back(w + ": expected " + what); }

    void convert(const Value& v, double& d, const std::string& w) {
        if (auto p = std::get_if<double>(&v.v)) d = *p;
        else if (auto q = std::get_if<long long>(&v.v)) d = static_cast<double>(*q);
        else bad(w, "a number");
    }
    void convert(const Value& v, long long& i, const std::string& w) {
        if (auto p = std::get_if<long long>(&v.v)) i = *p;
        else bad(w, "an integer");
    }
    void convert(const Value& v, int& i, const std::string& w) {
        long long t = i;
        convert(v, t, w);
        i = static_cast<int>(t);
    }
    template <class U>
        requires std::is_unsigned_v<U>
    void convert(const Value& v, U& i, const std::string& w) {
        long long t = 0;
        if (!std::holds_alternative<long long>(v.v)) return bad(w, "an integer");
        convert(v, t, w);
        if (t < 0) bad(w, "a nonnegative integer");
        else i = static_cast<U>(t);
    }
    void convert(const Value& v, bool& b, const std::string& w) {
        if (auto p = std::get_if<bool>(&v.v)) b = *p;
        else bad(w, "true or false");
    }
    void convert(const Value& v, std::string& s, const std::string& w) {
        if (auto p = std::get_if<std::string>(&v.v)) s = *p;
        else bad(w, "a string");
    }
    template <class T>
    void convert(const Value& v, std::vector<T>& out, const std::string& w) {
        const Array* a = std::get_if<Array>(&v.v);
        if (!a) return bad(w, "an array");
        std::vector<T> tmp(a->size());
        const std::size_t before = errors_.size();
        for (std::size_t i = 0; i < a->size(); ++i) convert((*a)[i], tmp[i], w + "[" + std::to_string(i) + "]");
        if (errors_.size() == before) out = std::move(tmp);
    }
};

std::string num(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quote(const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') o += '\\';
        if (c == '\n') {
            o += "\\n";
            continue;
        }
        o += c;
    }
    return o + "\"";
}

template <class T, class F>
std::string list(const std::vector<T>& v, F f) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f(v[i]);
    return s + "]";
}

}  // namespace

RadialMetric buildMetric(const MetricBlock& b) {
    const auto& p = b.params;
    auto integral = [](double x, const char* what) {
        if (std::floor(x) != x) raise(ErrorCode::ParameterRange, kModule, std::string(what) + " must be an integer");
        return static_cast<int>(x);
    };
    if (b.n < 2) raise(ErrorCode::Dimension, kModule, "dimension n must be >= 2");
    if (b.family == "hyperbolic") {
        if (p.size() > 1) raise(ErrorCode::ParameterRange, kModule, "hyperbolic takes [] or [scale]");
        RadialMetric m = RadialMetric::hyperbolicBall(b.n);
        if (p.size() == 1) {
            if (!(p[0] > 0.0)) raise(ErrorCode::ParameterRange, kModule, "scale must be positive");
            if (p[0] != 1.0) m = m.withMultiplier(ConformalFactor::constant(p[0]), 1.0);
        }
        return m;
    }
    if (b.family == "flat") {
        if (p.size() > 1) raise(ErrorCode::ParameterRange, kModule, "flat takes [] or [scale]");
        return RadialMetric::flat(b.n, p.empty() ? 1.0 : p[0]);
    }
    if (b.family == "conformal") {
        if (p.size() < 2 || p.size() > 3) raise(ErrorCode::ParameterRange, kModule, "conformal takes [c, k] or [c, k, sigma]");
        return RadialMetric::conformalHyperbolic(b.n, p[0], integral(p[1], "k"), p.size() == 3 ? p[2] : 1.0);
    }
    if (b.family == "perturbed") {
        if (p.size() != 2 && p.size() != 4)
            raise(ErrorCode::ParameterRange, kModule, "perturbed takes [alpha, j] or [alpha, j, beta, l]");
        return RadialMetric::perturbedHyperbolic(b.n, p[0], integral(p[1], "j"), p.size() == 4 ? p[2] : 0.0,
                                                 p.size() == 4 ? integral(p[3], "l") : 1);
    }
    raise(ErrorCode::InvalidArgument, kModule, "unknown metric family '" + b.family + "'");
}

std::vector<std::string> validateConfig(const RunConfig& c) {
    std::vector<std::string> e;
    if (std::find(knownCommands().begin(), knownCommands().end(), c.command) == knownCommands().end())
        e.push_back("command: unknown subcommand '" + c.command + "'");
    try {
        buildMetric(c.metric);
    } catch (const Error& err) {
        e.push_back("metric: " + err.detail());
    }
    const bool needsYamabe = c.command == "yamabe";
    if (needsYamabe && c.metric.n <= 2)
        e.push_back("metric.n: the yamabe command needs n >= 3 (critical exponent 2n/(n-2) undefined for n = 2)");
    if (c.grid.N < 16) e.push_back("grid.N: must be >= 16");
    if (!(c.grid.epsTrunc > 0.0 && c.grid.epsTrunc < 0.1)) e.push_back("grid.eps_trunc: must lie in (0, 0.1)");
    if (!(c.grid.tailRatio > 0.0 && c.grid.tailRatio < 1.0)) e.push_back("grid.ratio: must lie in (0, 1)");
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
        try {
            c.weights[i].validate();
            if (c.weights[i].k > 2) e.push_back("weights[" + std::to_string(i) + "]: k must be <= 2");
        } catch (const Error& err) {
            e.push_back("weights[" + std::to_string(i) + "]: " + err.detail());
        }
    }
    const YamabeConfig& y = c.yamabe;
    if (!(y.alpha > 0.0 && y.alpha < 1.0)) e.push_back("yamabe.alpha: must lie in (0, 1)");
    if (!(y.tol > 0.0)) e.push_back("yamabe.tol: must be positive");
    if (y.maxIter < 1) e.push_back("yamabe.max_iter: must be >= 1");
    if (!(y.lambdaMargin >= 0.0)) e.push_back("yamabe.lambda_margin: must be >= 0");
    if (!(y.rhoCut > 0.0 && y.rhoCut <= 1.0)) e.push_back("yamabe.rho_cut: must lie in (0, 1]");
    if (y.lambdaOverride && !(*y.lambdaOverride >= 0.0)) e.push_back("yamabe.lambda: must be >= 0");
    if (!(y.residualTarget > 0.0)) e.push_back("yamabe.residual_target: must be positive");
    if (y.targetOrder < 1) e.push_back("yamabe.target_order: must be >= 1");
    if (c.metric.n >= 3 && y.targetOrder > c.metric.n - 1)
        e.push_back("yamabe.target_order: must be <= n-1 (order n is obstructed)");
    for (double l : c.fredholm.lambdas)
        if (!(l >= 0.0)) e.push_back("fredholm.lambda: entries must be >= 0");
    if (c.fredholm.lambdas.empty() || c.fredholm.deltas.empty()) e.push_back("fredholm: lambda and delta lists must be nonempty");
    const MollifyBlock& m = c.mollify;
    if (!(m.period > 0.0)) e.push_back("mollify.period: must be positive");
    if (m.nx < 8) e.push_back("mollify.nx: must be >= 8");
    if (m.ny < 5) e.push_back("mollify.ny: must be >= 5");
    if (!(m.yMin > 0.0 && m.yMax > m.yMin)) e.push_back("mollify: need 0 < y_min < y_max");
    if (m.kernelResolution < 4) e.push_back("mollify.kernel_resolution: must be >= 4");
    if (m.taylorOrder < 1 || m.taylorOrder > 3) e.push_back("mollify.taylor_order: must lie in 1..3");
    if (c.output.dir.empty()) e.push_back("output.dir: must be nonempty");
    return e;
}

RunConfig parseConfig(const std::string& text) {
    std::vector<std::string> errors;
    Parser parser(text, errors);
    Reader r(parser.tables(), errors);
    r.checkUnknown({{"", {"command", "seed"}},
                    {"metric", {"family", "n", "params"}},
                    {"grid", {"N", "grading", "eps_trunc", "ratio"}},
                    {"weights", {"k", "p", "delta", "m"}},
                    {"yamabe",
                     {"target_order", "alpha", "tol", "max_iter", "lambda_margin", "rho_cut", "lambda",
                      "residual_target"}},
                    {"fredholm", {"lambda", "delta"}},
                    {"norms", {"exponents", "include_curvature"}},
                    {"mollify", {"period", "nx", "ny", "y_min", "y_max", "kernel_resolution", "taylor_order"}},
                    {"output", {"dir", "timing"}}});
    RunConfig c;
    if (!r.has("", "command")) errors.push_back("command: missing required key");
    r.read("", "command", c.command);
    r.read("", "seed", c.seed);
    if (parser.tables().count("metric")) {
        if (!r.has("metric", "family")) errors.push_back("metric.family: missing required key");
        if (!r.has("metric", "n")) errors.push_back("metric.n: missing required key");
    }
    r.read("metric", "family", c.metric.family);
    r.read("metric", "n", c.metric.n);
    r.read("metric", "params", c.metric.params);
    r.read("grid", "N", c.grid.N);
    std::string grading = c.grid.grading == Grading::Geometric ? "geometric" : "uniform";
    r.read("grid", "grading", grading);
    if (grading == "geometric") c.grid.grading = Grading::Geometric;
    else if (grading == "uniform") c.grid.grading = Grading::Uniform;
    else errors.push_back("grid.grading: must be \"geometric\" or \"uniform\"");
    r.read("grid", "eps_trunc", c.grid.epsTrunc);
    r.read("grid", "ratio", c.grid.tailRatio);
    if (parser.tables().count("weights")) {
        std::vector<int> k, m;
        std::vector<double> p, delta;
        r.read("weights", "k", k);
        r.read("weights", "p", p);
        r.read("weights", "delta", delta);
        r.read("weights", "m", m);
        if (k.size() != p.size() || k.size() != delta.size() || (!m.empty() && m.size() != k.size())) {
            errors.push_back("weights: k, p, delta (and m if given) must have equal lengths");
        } else {
            c.weights.clear();
            for (std::size_t i = 0; i < k.size(); ++i) {
                WeightSpec w{k[i], p[i], delta[i], std::nullopt};
                if (!m.empty() && m[i] >= 0) w.m = m[i];
                c.weights.push_back(w);
            }
        }
    }
    YamabeConfig& y = c.yamabe;
    r.read("yamabe", "target_order", y.targetOrder);
    r.read("yamabe", "alpha", y.alpha);
    r.read("yamabe", "tol", y.tol);
    r.read("yamabe", "max_iter", y.maxIter);
    r.read("yamabe", "lambda_margin", y.lambdaMargin);
    r.read("yamabe", "rho_cut", y.rhoCut);
    if (r.has("yamabe", "lambda")) {
        double l = 0.0;
        r.read("yamabe", "lambda", l);
        y.lambdaOverride = l;
    }
    r.read("yamabe", "residual_target", y.residualTarget);
    r.read("fredholm", "lambda", c.fredholm.lambdas);
    r.read("fredholm", "delta", c.fredholm.deltas);
    r.read("norms", "exponents", c.norms.exponents);
    r.read("norms", "include_curvature", c.norms.includeCurvature);
    r.read("mollify", "period", c.mollify.period);
    r.read("mollify", "nx", c.mollify.nx);
    r.read("mollify", "ny", c.mollify.ny);
    r.read("mollify", "y_min", c.mollify.yMin);
    r.read("mollify", "y_max", c.mollify.yMax);
    r.read("mollify", "kernel_resolution", c.mollify.kernelResolution);
    r.read("mollify", "taylor_order", c.mollify.taylorOrder);
    r.read("output", "dir", c.output.dir);
    r.read("output", "timing", c.output.timing);

    if (errors.empty()) {
        const std::vector<std::string> v = validateConfig(c);
        errors.insert(errors.end(), v.begin(), v.end());
    }
    if (!errors.empty()) {
        std::string msg;
        for (const std::string& s : errors) msg += (msg.empty() ? "" : "\n") + s;
        raise(ErrorCode::Config, kModule, msg);
    }
    return c;
}

std::string serializeConfig(const RunConfig& c) {
    std::ostringstream o;
    auto d = [](double x) { return num(x); };
    o << "command = " << quote(c.command) << "\n";
    o << "seed = " << c.seed << "\n\n";
    o << "[metric]\nfamily = " << quote(c.metric.family) << "\nn = " << c.metric.n << "\nparams = " << list(c.metric.params, d)
      << "\n\n";
    o << "[grid]\nN = " << c.grid.N << "\ngrading = " << quote(c.grid.grading == Grading::Geometric ? "geometric" : "uniform")
      << "\neps_trunc = " << num(c.grid.epsTrunc) << "\nratio = " << num(c.grid.tailRatio) << "\n\n";
    std::vector<int> k, m;
    std::vector<double> p, delta;
    bool anyM = false;
    for (const WeightSpec& w : c.weights) {
        k.push_back(w.k);
        p.push_back(w.p);
        delta.push_back(w.delta);
        m.push_back(w.m.value_or(-1));
        anyM = anyM || w.m.has_value();
    }
    auto i = [](int x) { return std::to_string(x); };
    o << "[weights]\nk = " << list(k, i) << "\np = " << list(p, d) << "\ndelta = " << list(delta, d) << "\n";
    if (anyM) o << "m = " << list(m, i) << "\n";
    const YamabeConfig& y = c.yamabe;
    o << "\n[yamabe]\ntarget_order = " << y.targetOrder << "\nalpha = " << num(y.alpha) << "\ntol = " << num(y.tol)
      << "\nmax_iter = " << y.maxIter << "\nlambda_margin = " << num(y.lambdaMargin) << "\nrho_cut = " << num(y.rhoCut)
      << "\n";
    if (y.lambdaOverride) o << "lambda = " << num(*y.lambdaOverride) << "\n";
    o << "residual_target = " << num(y.residualTarget) << "\n\n";
    o << "[fredholm]\nlambda = " << list(c.fredholm.lambdas, d) << "\ndelta = " << list(c.fredholm.deltas, d) << "\n\n";
    o << "[norms]\nexponents = " << list(c.norms.exponents, d)
      << "\ninclude_curvature = " << (c.norms.includeCurvature ? "true" : "false") << "\n\n";
    const MollifyBlock& mb = c.mollify;
    o << "[mollify]\nperiod = " << num(mb.period) << "\nnx = " << mb.nx << "\nny = " << mb.ny << "\ny_min = " << num(mb.yMin)
      << "\ny_max = " << num(mb.yMax) << "\nkernel_resolution = " << mb.kernelResolution
      << "\ntaylor_order = " << mb.taylorOrder << "\n\n";
    o << "[output]\ndir = " << quote(c.output.dir) << "\ntiming = " << (c.output.timing ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace ahy
