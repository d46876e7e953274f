#pragma once

// Configuration-driven scenarios: JSON config -> validated, default-filled
// configuration -> CSV artifacts, summary.json and a manifest. Needs nlohmann/json.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "thermoflow/thermoflow.hpp"

namespace thermoflow::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> s{"integrate",   "conjugate-scan",     "green",
                                            "dominated",   "index",              "maslov",
                                            "mirror-check", "construct-gaussian", "perturb-experiment"};
    return s;
}

/// Configuration rejected before any artifact is written; `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line)
        : Error(line ? "config line " + std::to_string(line) + ": " + what : "config: " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// ---------------------------------------------------------------- formatting

inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Rows of numbers (or preformatted cells) under a header.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(fmt(v));
        rows_.push_back(std::move(cells));
    }
    void row_cells(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    std::string str() const {
        std::string s = join(header_);
        for (const auto& r : rows_) s += join(r);
        return s;
    }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
        return s + "\n";
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// (header, rows) of a numeric CSV file; "inf"/"nan" accepted.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    CsvData d;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t\r"));
            cell.erase(cell.find_last_not_of(" \t\r") + 1);
            out.push_back(cell);
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (d.header.empty()) {
            d.header = cells;
            continue;
        }
        if (cells.size() != d.header.size())
            throw DomainError(path.string() + ":" + std::to_string(lineno) + ": wrong number of columns");
        std::vector<double> r;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                r.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw DomainError(path.string() + ":" + std::to_string(lineno) + ": not a number: " + c);
            }
        }
        d.rows.push_back(std::move(r));
    }
    return d;
}

// ---------------------------------------------------------------- seeds and threads

/// SplitMix64 finalizer: decorrelated sub-run seeds from (seed, index).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// fn(i) for i in [0, n) on up to `threads` workers; results must be written by index.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first;
    std::mutex m;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------- config

/// Validated configuration with every default filled in.
struct RunConfig {
    std::string scenario;
    json resolved;
    std::filesystem::path base_dir;  // relative CSV paths are resolved against it
    std::uint64_t seed = 0;
};

namespace detail {

/// Line of the first occurrence of "key" in the source text (0 if absent).
inline std::size_t line_of(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Checker {
public:
    explicit Checker(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(msg, line_of(text_, key));
    }

    void keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) const {
        if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) fail(it.key(), "unknown key '" + it.key() + "' in " + where);
        }
    }

    /// Number at obj[key] (default filled in when absent), with an optional constraint.
    double number(json& obj, const char* key, std::optional<double> def, const char* rule = nullptr) const {
        if (!obj.contains(key)) {
            if (!def) fail(key, std::string("missing required key '") + key + "'");
            obj[key] = *def;
        }
        if (!obj[key].is_number()) fail(key, std::string("'") + key + "' must be a number");
        const double v = obj[key].get<double>();
        if (!std::isfinite(v)) fail(key, std::string("'") + key + "' must be finite");
        if (rule) {
            const std::string r = rule;
            const bool ok = (r == ">0" && v > 0) || (r == ">=0" && v >= 0) || (r == "!=0" && v != 0) ||
                            (r == "(0,1)" && v > 0 && v < 1);
            if (!ok) fail(key, std::string("'") + key + "' must satisfy " + r + ", got " + fmt(v));
        }
        return v;
    }

    long long integer(json& obj, const char* key, long long def, long long min) const {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_number_integer()) fail(key, std::string("'") + key + "' must be an integer");
        const long long v = obj[key].get<long long>();
        if (v < min) fail(key, std::string("'") + key + "' must be >= " + std::to_string(min));
        return v;
    }

    std::vector<double> increasing_list(json& obj, const char* key, std::vector<double> def) const {
        if (!obj.contains(key)) obj[key] = def;
        if (!obj[key].is_array() || obj[key].empty()) fail(key, std::string("'") + key + "' must be a non-empty list");
        std::vector<double> out;
        for (const auto& x : obj[key]) {
            if (!x.is_number()) fail(key, std::string("'") + key + "' must contain numbers");
            out.push_back(x.get<double>());
            if (!(out.back() > 0) || (out.size() > 1 && !(out.back() > out[out.size() - 2])))
                fail(key, std::string("'") + key + "' must be positive and increasing");
        }
        return out;
    }

private:
    const std::string& text_;
};

inline void check_fourier_modes(const Checker& c, json& block, const char* where) {
    c.keys(block, {"modes"}, where);
    if (!block.contains("modes") || !block["modes"].is_array()) c.fail(where, std::string(where) + " needs a 'modes' list");
    for (auto& m : block["modes"]) {
        c.keys(m, {"k1", "k2", "re", "im"}, "mode");
        c.integer(m, "k1", 0, -1'000'000);
        c.integer(m, "k2", 0, -1'000'000);
        c.number(m, "re", 0.0);
        c.number(m, "im", 0.0);
    }
}

inline void check_metric(const Checker& c, json& cfg) {
    if (!cfg.contains("metric")) c.fail("metric", "missing required block 'metric'");
    json& m = cfg["metric"];
    if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string()) c.fail("metric", "metric needs a 'kind' string");
    const std::string kind = m["kind"];
    if (kind == "flat_torus") {
        c.keys(m, {"kind", "L1", "L2"}, "metric");
        c.number(m, "L1", 1.0, ">0");
        c.number(m, "L2", 1.0, ">0");
    } else if (kind == "conformal_torus") {
        c.keys(m, {"kind", "L1", "L2", "u"}, "metric");
        c.number(m, "L1", 1.0, ">0");
        c.number(m, "L2", 1.0, ">0");
        if (!m.contains("u")) c.fail("metric", "conformal_torus needs 'u'");
        json& u = m["u"];
        if (u.contains("catalog")) {
            c.keys(u, {"catalog", "a", "b"}, "u");
            if (!u["catalog"].is_string()) c.fail("catalog", "'catalog' must be a string");
            const std::string name = u["catalog"];
            if (name != "cosine" && name != "mixed") c.fail("catalog", "unknown conformal catalog entry '" + name + "'");
            c.number(u, "a", 0.1);
            c.number(u, "b", name == "mixed" ? 0.05 : 0.0);
        } else {
            check_fourier_modes(c, u, "u");
        }
    } else if (kind == "round_sphere") {
        c.keys(m, {"kind", "R"}, "metric");
        c.number(m, "R", 1.0, ">0");
    } else {
        c.fail("kind", "unknown metric kind '" + kind + "'");
    }
}

inline void check_lambda(const Checker& c, json& cfg, bool sphere) {
    if (!cfg.contains("lambda")) cfg["lambda"] = json{{"constant", 0.0}};
    json& l = cfg["lambda"];
    if (!l.is_object()) c.fail("lambda", "'lambda' must be an object");
    if (l.contains("constant")) {
        c.keys(l, {"constant"}, "lambda");
        c.number(l, "constant", 0.0);
    } else if (l.contains("modes")) {
        c.keys(l, {"modes"}, "lambda");
        if (sphere) c.fail("modes", "the sphere backend supports constant lambda only");
        if (!l["modes"].is_array()) c.fail("modes", "'modes' must be a list");
        for (auto& m : l["modes"]) {
            c.keys(m, {"k", "c"}, "lambda mode");
            c.integer(m, "k", 0, 0);
            if (!m.contains("c")) c.fail("k", "lambda mode needs a coefficient block 'c'");
            check_fourier_modes(c, m["c"], "c");
        }
    } else if (l.contains("gaussian")) {
        c.keys(l, {"gaussian"}, "lambda");
        if (sphere) c.fail("gaussian", "the Gaussian construction needs a torus metric");
        json& gblock = l["gaussian"];
        c.keys(gblock, {"n"}, "gaussian");
        const long long n = c.integer(gblock, "n", 64, 2);
        if ((n & (n - 1)) != 0) c.fail("n", "'n' must be a power of two");
    } else {
        c.fail("lambda", "lambda needs 'constant', 'modes' or 'gaussian'");
    }
}

inline void check_initial(const Checker& c, json& cfg, bool sphere, double R) {
    if (!cfg.contains("initial")) {
        cfg["initial"] = sphere ? json::array({json{{"p", {0.0, 0.0, R}}, {"v", {1.0, 0.0, 0.0}}}})
                                : json::array({json{{"q1", 0.0}, {"q2", 0.0}, {"theta", 0.0}}});
    }
    json& init = cfg["initial"];
    if (!init.is_array()) c.fail("initial", "'initial' must be a list of states");
    for (auto& s : init) {
        if (sphere) {
            c.keys(s, {"p", "v"}, "initial state");
            for (const char* k : {"p", "v"}) {
                if (!s.contains(k) || !s[k].is_array() || s[k].size() != 3)
                    c.fail("initial", std::string("sphere state needs a 3-vector '") + k + "'");
                for (const auto& x : s[k])
                    if (!x.is_number()) c.fail("initial", "sphere state components must be numbers");
            }
            const Eigen::Vector3d p(s["p"][0].get<double>(), s["p"][1].get<double>(), s["p"][2].get<double>());
            const Eigen::Vector3d v(s["v"][0].get<double>(), s["v"][1].get<double>(), s["v"][2].get<double>());
            if (p.norm() == 0 || (v - p.normalized() * p.normalized().dot(v)).norm() == 0)
                c.fail("initial", "degenerate sphere state");
        } else {
            c.keys(s, {"q1", "q2", "theta"}, "initial state");
            c.number(s, "q1", 0.0);
            c.number(s, "q2", 0.0);
            c.number(s, "theta", 0.0);
        }
    }
}

inline void check_path(const Checker& c, json& cfg) {
    json& p = cfg["path"];
    if (p.contains("csv")) {
        c.keys(p, {"csv"}, "path");
        if (!p["csv"].is_string()) c.fail("csv", "'csv' must be a file name");
    } else {
        c.keys(p, {"kappa", "vlam"}, "path");
        c.number(p, "kappa", std::nullopt);
        c.number(p, "vlam", 0.0);
    }
}

} // namespace detail

/// Parse and validate a configuration; `scenario` comes from the subcommand.
inline RunConfig load_config(const std::string& text, const std::string& scenario,
                             const std::filesystem::path& base_dir = ".") {
    using detail::Checker;
    const Checker c(text);
    if (std::find(scenario_names().begin(), scenario_names().end(), scenario) == scenario_names().end())
        throw ConfigError("unknown scenario '" + scenario + "'", 0);
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        throw ConfigError(std::string("malformed JSON: ") + e.what(),
                          1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n')));
    }
    if (!cfg.is_object()) throw ConfigError("top level must be an object", 1);
    c.keys(cfg, {"scenario", "metric", "lambda", "initial", "path", "params", "tolerances", "seed", "random_samples",
                 "sweep"},
           "config");
    if (cfg.contains("scenario")) {
        if (!cfg["scenario"].is_string() || cfg["scenario"] != scenario)
            c.fail("scenario", "config scenario does not match the subcommand '" + scenario + "'");
    }
    cfg["scenario"] = scenario;
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0))
        c.fail("seed", "'seed' must be a non-negative integer");
    RunConfig rc;
    rc.scenario = scenario;
    rc.seed = cfg["seed"].get<std::uint64_t>();
    rc.base_dir = base_dir;

    if (cfg.contains("sweep")) {
        json& s = cfg["sweep"];
        c.keys(s, {"parameter", "values"}, "sweep");
        if (!s.contains("parameter") || !s["parameter"].is_string()) c.fail("sweep", "sweep needs a 'parameter' pointer");
        if (!s.contains("values") || !s["values"].is_array()) c.fail("sweep", "sweep needs a 'values' list");
        try {
            json::json_pointer ptr(s["parameter"].get<std::string>());
            if (ptr.empty()) c.fail("parameter", "sweep parameter must not be the whole config");
        } catch (const json::exception&) {
            c.fail("parameter", "sweep parameter is not a JSON pointer");
        }
        // each sub-run is validated on its own; here only the base must be well formed
        json base = cfg;
        base.erase("sweep");
        if (!s["values"].empty()) {
            json probe = base;
            probe[json::json_pointer(s["parameter"].get<std::string>())] = s["values"][0];
            load_config(probe.dump(2), scenario, base_dir);
        }
        rc.resolved = cfg;
        return rc;
    }

    const bool experiment = scenario == "perturb-experiment";
    const bool synthetic = cfg.contains("path");
    if (synthetic) {
        if (scenario != "conjugate-scan" && scenario != "green" && scenario != "index" && scenario != "dominated")
            c.fail("path", "synthetic paths are accepted by conjugate-scan, green, dominated and index only");
        if (cfg.contains("metric") || cfg.contains("lambda") || cfg.contains("initial"))
            c.fail("path", "a synthetic path replaces 'metric', 'lambda' and 'initial'");
        detail::check_path(c, cfg);
    } else if (experiment) {
        for (const char* k : {"metric", "lambda", "initial"})
            if (cfg.contains(k)) c.fail(k, std::string("perturb-experiment builds its own system; remove '") + k + "'");
    } else {
        detail::check_metric(c, cfg);
        const bool sphere = cfg["metric"]["kind"] == "round_sphere";
        if (scenario == "construct-gaussian") {
            if (sphere) c.fail("metric", "construct-gaussian needs a torus metric");
            if (cfg.contains("lambda")) c.fail("lambda", "construct-gaussian builds lambda; remove 'lambda'");
        } else {
            detail::check_lambda(c, cfg, sphere);
        }
        detail::check_initial(c, cfg, sphere, sphere ? cfg["metric"]["R"].get<double>() : 1.0);
    }

    if (!cfg.contains("tolerances")) cfg["tolerances"] = json::object();
    c.keys(cfg["tolerances"], {"rtol", "atol"}, "tolerances");
    c.number(cfg["tolerances"], "rtol", 1e-9, ">0");
    c.number(cfg["tolerances"], "atol", 1e-12, ">0");
    c.integer(cfg, "random_samples", 0, 0);

    if (!cfg.contains("params")) cfg["params"] = json::object();
    json& p = cfg["params"];
    if (scenario == "integrate") {
        c.keys(p, {"ta", "tb", "samples"}, "params");
        const double ta = c.number(p, "ta", 0.0), tb = c.number(p, "tb", 10.0);
        if (!(ta <= 0 && tb >= 0 && tb > ta)) c.fail("tb", "integration span must satisfy ta <= 0 <= tb, ta < tb");
        c.integer(p, "samples", 0, 0);
    } else if (scenario == "conjugate-scan") {
        c.keys(p, {"T"}, "params");
        c.number(p, "T", 10.0, ">0");
    } else if (scenario == "green") {
        c.keys(p, {"T_list"}, "params");
        c.increasing_list(p, "T_list", default_green_horizons());
    } else if (scenario == "dominated") {
        c.keys(p, {"T", "margin", "gap_tolerance", "T_list"}, "params");
        c.number(p, "T", 10.0, ">0");
        c.number(p, "margin", 0.5, "(0,1)");
        c.number(p, "gap_tolerance", 1e-6, ">0");
        c.increasing_list(p, "T_list", default_green_horizons());
    } else if (scenario == "index") {
        c.keys(p, {"T", "witness"}, "params");
        c.number(p, "T", 5.0, ">0");
        if (p.contains("witness")) {
            json& w = p["witness"];
            c.keys(w, {"a", "b", "ta", "tb"}, "witness");
            const double a = c.number(w, "a", std::nullopt), b = c.number(w, "b", std::nullopt);
            const double ta = c.number(w, "ta", a), tb = c.number(w, "tb", b + 0.5);
            if (!(ta <= a && a < b && b < tb)) c.fail("witness", "witness needs ta <= a < b < tb");
        }
    } else if (scenario == "maslov") {
        c.keys(p, {"period", "section", "samples", "curve_csv"}, "params");
        if (p.contains("curve_csv")) {
            if (!p["curve_csv"].is_string()) c.fail("curve_csv", "'curve_csv' must be a file name");
            if (p.contains("section")) c.fail("section", "'section' and 'curve_csv' are exclusive");
        } else {
            c.number(p, "period", std::nullopt, ">0");
            if (!p.contains("section")) p["section"] = json{{"z0", 1.0}, {"dz0", 0.0}};
            c.keys(p["section"], {"z0", "dz0"}, "section");
            const double z0 = c.number(p["section"], "z0", 1.0), dz0 = c.number(p["section"], "dz0", 0.0);
            if (z0 == 0 && dz0 == 0) c.fail("section", "section initial data must be nonzero");
            c.integer(p, "samples", 64, 2);
        }
        if (!synthetic && cfg.contains("metric") && cfg["metric"]["kind"] == "round_sphere" && !p.contains("curve_csv"))
            c.fail("metric", "maslov closed-orbit checks are implemented on torus metrics");
    } else if (scenario == "mirror-check") {
        c.keys(p, {"T", "grid"}, "params");
        c.number(p, "T", 5.0, ">0");
        c.integer(p, "grid", 16, 2);
    } else if (scenario == "construct-gaussian") {
        c.keys(p, {"n", "n_theta"}, "params");
        const long long n = c.integer(p, "n", 64, 2);
        if ((n & (n - 1)) != 0) c.fail("n", "'n' must be a power of two");
        c.integer(p, "n_theta", 8, 1);
    } else if (scenario == "perturb-experiment") {
        c.keys(p, {"T", "eps", "delta", "k", "L2"}, "params");
        c.number(p, "T", 10.0, ">0");
        c.number(p, "eps", 0.04, ">=0");
        c.number(p, "delta", 0.1, ">0");
        c.integer(p, "k", 2, 1);
        c.number(p, "L2", 1.0, ">0");
    }
    rc.resolved = cfg;
    return rc;
}

// ---------------------------------------------------------------- system construction

struct System {
    std::optional<Metric> metric;
    GeneratorPtr lambda;
    std::vector<UnitTangent> initial;
    PathPtr path;  // synthetic coefficient path
};

namespace detail {

inline FourierSeries2D series_of(const json& block, double L1, double L2) {
    std::vector<FourierMode> modes;
    for (const auto& m : block["modes"])
        modes.push_back({m["k1"].get<int>(), m["k2"].get<int>(), cplx(m["re"].get<double>(), m["im"].get<double>())});
    return FourierSeries2D(L1, L2, std::move(modes));
}

inline Metric metric_of(const json& m) {
    const std::string kind = m["kind"];
    if (kind == "round_sphere") return Metric::round_sphere(m["R"].get<double>());
    const double L1 = m["L1"], L2 = m["L2"];
    if (kind == "flat_torus") return Metric::flat_torus(L1, L2);
    const json& u = m["u"];
    if (u.contains("catalog")) {
        const double a = u["a"], b = u["b"];
        const bool mixed = u["catalog"] == "mixed";
        return Metric::conformal_torus(L1, L2, ConformalFactor::closed_form([=](double q1, double q2) {
            const double k1 = two_pi / L1, k2 = two_pi / L2;
            Jet2 j;
            j.v = a * std::cos(k1 * q1);
            j.d1 = -a * k1 * std::sin(k1 * q1);
            j.d11 = -a * k1 * k1 * std::cos(k1 * q1);
            if (mixed) {
                const double ph = k1 * q1 + k2 * q2, s = std::sin(ph), c = std::cos(ph);
                j.v += b * s;
                j.d1 += b * k1 * c;
                j.d2 += b * k2 * c;
                j.d11 -= b * k1 * k1 * s;
                j.d12 -= b * k1 * k2 * s;
                j.d22 -= b * k2 * k2 * s;
            }
            return j;
        }));
    }
    // u is the real part of the series
    return Metric::conformal_torus(L1, L2, ConformalFactor::from_series(series_of(u, L1, L2)));
}

inline GeneratorPtr lambda_of(const json& l, const Metric& g) {
    if (l.contains("constant")) return FourierGenerator::constant(l["constant"].get<double>());
    if (l.contains("gaussian")) return gaussian_from_curvature(g, l["gaussian"]["n"].get<std::size_t>(), 1).lambda;
    std::vector<FourierGenerator::Mode> modes;
    for (const auto& m : l["modes"]) {
        auto s = std::make_shared<FourierSeries2D>(series_of(m["c"], g.period1(), g.period2()));
        modes.push_back({m["k"].get<int>(), [s](double q1, double q2) {
                             const CJet2 j = s->jet(q1, q2);
                             return CJet1{j.v, j.d1, j.d2};
                         }});
    }
    return std::make_shared<FourierGenerator>(std::move(modes));
}

inline UnitTangent state_of(const json& s, const Metric& g) {
    if (g.is_torus()) return TorusTangent{s["q1"].get<double>(), s["q2"].get<double>(), s["theta"].get<double>()};
    const Eigen::Vector3d p(s["p"][0].get<double>(), s["p"][1].get<double>(), s["p"][2].get<double>());
    const Eigen::Vector3d v(s["v"][0].get<double>(), s["v"][1].get<double>(), s["v"][2].get<double>());
    return sphere_tangent(g, p, v);
}

/// Uniform random unit tangent (torus: uniform in the chart box and angle; sphere: normalized Gaussians).
inline UnitTangent random_state(const Metric& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0, 1);
    if (g.is_torus()) return TorusTangent{g.period1() * U(rng), g.period2() * U(rng), two_pi * U(rng)};
    std::normal_distribution<double> N(0, 1);
    Eigen::Vector3d p(N(rng), N(rng), N(rng)), d(N(rng), N(rng), N(rng));
    return sphere_tangent(g, p, d);
}

} // namespace detail

inline System build_system(const RunConfig& rc, std::uint64_t seed) {
    const json& cfg = rc.resolved;
    System s;
    if (cfg.contains("path")) {
        const json& p = cfg["path"];
        if (p.contains("csv")) {
            const auto d = read_csv(rc.base_dir / p["csv"].get<std::string>());
            if (d.header.size() != 2 || d.header[0] != "t" || d.header[1] != "kappa")
                throw DomainError("synthetic path CSV needs the header t,kappa");
            std::vector<double> t, k;
            for (const auto& r : d.rows) {
                t.push_back(r[0]);
                k.push_back(r[1]);
            }
            s.path = std::make_shared<TabulatedPath>(std::move(t), std::move(k));
        } else {
            s.path = SyntheticPath::constant(p["kappa"].get<double>(), p["vlam"].get<double>());
        }
        return s;
    }
    if (!cfg.contains("metric")) return s;
    s.metric = detail::metric_of(cfg["metric"]);
    if (cfg.contains("lambda")) s.lambda = detail::lambda_of(cfg["lambda"], *s.metric);
    for (const auto& st : cfg["initial"]) s.initial.push_back(detail::state_of(st, *s.metric));
    std::mt19937_64 rng(split_seed(seed, 0));
    for (long long i = 0; i < cfg["random_samples"].get<long long>(); ++i)
        s.initial.push_back(detail::random_state(*s.metric, rng));
    return s;
}

// ---------------------------------------------------------------- scenarios

struct Artifact {
    std::string name;
    std::string content;
};

struct Outcome {
    json metrics = json::object();
    json checks = json::object();  // name -> bool
    std::vector<Artifact> artifacts;
    std::string error;             // numerical failure, artifacts so far retained
    bool checks_passed() const {
        for (const auto& [k, v] : checks.items())
            if (!v.get<bool>()) return false;
        return true;
    }
};

namespace detail {

inline OdeOptions flow_options(const json& cfg) {
    OdeOptions o;
    o.rtol = cfg["tolerances"]["rtol"];
    o.atol = cfg["tolerances"]["atol"];
    return o;
}

/// (q1, q2, theta) columns: torus states reduced; sphere states as (longitude, latitude, heading from east).
inline std::array<double, 3> state_columns(const Metric& g, const UnitTangent& v) {
    const auto n = normalize(g, v);
    if (const auto* t = std::get_if<TorusTangent>(&n)) return {t->q1, t->q2, t->theta};
    const auto& s = std::get<SphereTangent>(n);
    const Eigen::Vector3d p = s.p / g.radius();
    const double lon = std::atan2(p.y(), p.x()), lat = std::asin(std::clamp(p.z(), -1.0, 1.0));
    const Eigen::Vector3d east(-std::sin(lon), std::cos(lon), 0), north = p.cross(east);
    return {lon, lat, wrap_periodic(std::atan2(s.v.dot(north), s.v.dot(east)), two_pi)};
}

inline void scenario_integrate(const RunConfig& rc, const System& sys, int threads, Outcome& out) {
    const json& p = rc.resolved["params"];
    const double ta = p["ta"], tb = p["tb"];
    const auto n = p["samples"].get<std::size_t>();
    const auto opt = flow_options(rc.resolved);
    std::vector<std::string> files(sys.initial.size());
    std::vector<double> identity(sys.initial.size(), 0), mmin(sys.initial.size(), 1), m0(sys.initial.size(), 1);
    parallel_for(sys.initial.size(), threads, [&](std::size_t i) {
        const auto tr = integrate_flow(*sys.metric, sys.lambda, sys.initial[i], ta, tb, opt);
        std::vector<double> ts = n > 0 ? std::vector<double>{} : tr->dense().grid();
        for (std::size_t k = 0; n > 0 && k <= n; ++k) ts.push_back(ta + (tb - ta) * k / static_cast<double>(n));
        CsvTable csv({"t", "q1", "q2", "theta", "vlam", "KK", "kappa_tilde", "m"});
        for (double t : ts) {
            const auto c = tr->at(t);
            const auto q = state_columns(*sys.metric, tr->state(t));
            const double m = tr->damping(t);
            csv.row({t, q[0], q[1], q[2], c.vlam, c.kk, c.kappa_tilde, m});
            const double kt = damped_curvature(*sys.metric, *sys.lambda, tr->state(t));
            identity[i] = std::max(identity[i], std::abs(c.kappa_tilde - kt));
            mmin[i] = std::min(mmin[i], m);
        }
        m0[i] = tr->damping(0.0);
        files[i] = csv.str();
    });
    double worst = 0, lowest = 1;
    bool start = true;
    for (std::size_t i = 0; i < files.size(); ++i) {
        out.artifacts.push_back({files.size() == 1 ? "trajectory.csv" : "trajectory_" + std::to_string(i) + ".csv",
                                 files[i]});
        worst = std::max(worst, identity[i]);
        lowest = std::min(lowest, mmin[i]);
        start = start && m0[i] == 1.0;
    }
    out.metrics["trajectories"] = files.size();
    out.metrics["max_trace_identity_defect"] = worst;
    out.metrics["min_damping"] = lowest;
    out.checks["trace_identity_1e-10"] = worst < 1e-10;
    out.checks["damping_positive"] = lowest > 0;
    out.checks["damping_starts_at_one"] = start;
}

inline void scenario_conjugate(const RunConfig& rc, const System& sys, int threads, Outcome& out) {
    const double T = rc.resolved["params"]["T"];
    CsvTable csv({"v_q1", "v_q2", "v_theta", "first_conjugate_time"});
    if (sys.path) {
        const auto r = conjugate_scan(sys.path, T);
        csv.row({0, 0, 0, r.first_conjugate_time.value_or(std::nan(""))});
        out.metrics["first_conjugate_time"] = r.first_conjugate_time ? json(*r.first_conjugate_time) : json(nullptr);
        out.metrics["zeros"] = r.zeros.size();
        if (!r.error.empty()) out.error = r.error;
        out.artifacts.push_back({"conjugate.csv", csv.str()});
        return;
    }
    std::vector<ConjugateReport> reps(sys.initial.size());
    parallel_for(sys.initial.size(), threads, [&](std::size_t i) {
        reps[i] = conjugate_scan(*sys.metric, sys.lambda, sys.initial[i], T, flow_options(rc.resolved));
    });
    json times = json::array();
    std::size_t failures = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto q = state_columns(*sys.metric, sys.initial[i]);
        const double t = reps[i].first_conjugate_time.value_or(std::nan(""));
        csv.row({q[0], q[1], q[2], t});
        times.push_back(reps[i].first_conjugate_time ? json(t) : json(nullptr));
        if (!reps[i].error.empty()) ++failures;
    }
    out.metrics["first_conjugate_time"] = times.empty() ? json(nullptr) : times[0];
    out.metrics["first_conjugate_times"] = times;
    out.metrics["scan_failures"] = failures;
    out.artifacts.push_back({"conjugate.csv", csv.str()});
    if (failures) out.error = "integration failed for " + std::to_string(failures) + " sample(s)";
}

inline void scenario_green(const RunConfig& rc, const System& sys, int threads, Outcome& out) {
    const auto Ts = rc.resolved["params"]["T_list"].get<std::vector<double>>();
    std::vector<GreenReport> reps;
    std::vector<std::array<double, 3>> where;
    if (sys.path) {
        reps.push_back(green_limits(sys.path, Ts));
        where.push_back({0, 0, 0});
    } else {
        reps.resize(sys.initial.size());
        parallel_for(sys.initial.size(), threads, [&](std::size_t i) {
            const auto tr = integrate_flow(*sys.metric, sys.lambda, sys.initial[i], -Ts.back(), Ts.back(),
                                           flow_options(rc.resolved));
            reps[i] = green_limits(tr, Ts);
        });
        for (const auto& v : sys.initial) where.push_back(state_columns(*sys.metric, v));
    }
    CsvTable slopes({"sample", "T", "dzT_forward", "dzT_backward"});
    CsvTable limits({"q1", "q2", "theta", "u_s", "u_u", "gap", "cauchy_defect", "valid"});
    bool all_valid = true;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        for (std::size_t k = 0; k < r.dzT_forward.size() && k < r.dzT_backward.size(); ++k)
            slopes.row({static_cast<double>(i), Ts[k], r.dzT_forward[k], r.dzT_backward[k]});
        const double nan = std::nan("");
        limits.row({where[i][0], where[i][1], where[i][2], r.valid ? r.u_s : nan, r.valid ? r.u_u : nan,
                    r.valid ? r.gap : nan, r.cauchy_defect, r.valid ? 1.0 : 0.0});
        all_valid = all_valid && r.valid;
    }
    const auto& r0 = reps.front();
    out.metrics["valid"] = r0.valid;
    out.metrics["u_s"] = r0.valid ? json(r0.u_s) : json(nullptr);
    out.metrics["u_u"] = r0.valid ? json(r0.u_u) : json(nullptr);
    out.metrics["gap"] = r0.valid ? json(r0.gap) : json(nullptr);
    out.metrics["dzT_forward"] = r0.dzT_forward;
    if (r0.offending_horizon) out.metrics["offending_horizon"] = *r0.offending_horizon;
    if (!r0.message.empty()) out.metrics["message"] = r0.message;
    out.metrics["all_valid"] = all_valid;
    out.artifacts.push_back({"green_slopes.csv", slopes.str()});
    out.artifacts.push_back({"green.csv", limits.str()});
}

inline void scenario_dominated(const RunConfig& rc, const System& sys, int threads, Outcome& out) {
    const json& p = rc.resolved["params"];
    DominationOptions o;
    o.T = p["T"];
    o.margin = p["margin"];
    o.gap_tolerance = p["gap_tolerance"];
    o.T_list = p["T_list"].get<std::vector<double>>();
    std::vector<CertificateRow> rows;
    if (sys.path) {
        rows.push_back(certify_path(sys.path, o));
    } else {
        if (!sys.metric->is_torus()) throw DomainError("the domination certificate is implemented on torus metrics");
        rows.resize(sys.initial.size());
        parallel_for(sys.initial.size(), threads, [&](std::size_t i) {
            rows[i] = domination_certificate(*sys.metric, sys.lambda, {sys.initial[i]}, o).rows.front();
        });
    }
    CsvTable csv({"q1", "q2", "theta", "u_s", "u_u", "gap", "rate", "status"});
    for (const auto& r : rows)
        csv.row_cells({fmt(r.q1), fmt(r.q2), fmt(r.theta), fmt(r.u_s), fmt(r.u_u), fmt(r.gap), fmt(r.rate),
                       to_string(r.status)});
    const auto status = combine(rows);
    out.metrics["status"] = to_string(status);
    out.metrics["samples"] = rows.size();
    out.metrics["note"] = DominationCertificate::disclaimer;
    out.artifacts.push_back({"certificate.csv", csv.str()});
}

inline void scenario_index(const RunConfig& rc, const System& sys, int, Outcome& out) {
    const json& p = rc.resolved["params"];
    const double T = p["T"];
    PathPtr path = sys.path;
    double span_lo = -T, span_hi = T;
    if (p.contains("witness")) {
        span_lo = std::min(span_lo, p["witness"]["ta"].get<double>());
        span_hi = std::max(span_hi, p["witness"]["tb"].get<double>());
    }
    if (!path) path = integrate_flow(*sys.metric, sys.lambda, sys.initial.front(), span_lo, span_hi,
                                     flow_options(rc.resolved));
    try {
        const auto tent = tent_fT(path, T);
        CsvTable csv({"t", "f", "fdot"});
        for (const auto& s : tent.f.sample(200)) csv.row({s.t, s.f, s.fdot});
        out.artifacts.push_back({"tent.csv", csv.str()});
        out.metrics["I_fT"] = tent.quadrature;
        out.metrics["identity"] = tent.identity;
        out.metrics["dzT_forward"] = tent.dz_forward;
        out.metrics["dzT_backward"] = tent.dz_backward;
        out.checks["identity_matches_quadrature_1e-8"] = std::abs(tent.quadrature - tent.identity) < 1e-8;
    } catch (const ConjugatePointError& e) {
        out.metrics["tent_error"] = e.what();
        out.metrics["conjugate_horizon"] = e.horizon();
    }
    if (p.contains("witness")) {
        const json& w = p["witness"];
        const auto r = negative_index_witness(path, w["a"], w["b"], w["ta"], w["tb"]);
        CsvTable csv({"t", "f", "fdot"});
        for (const auto& s : r.f.sample(100)) csv.row({s.t, s.f, s.fdot});
        std::string body = csv.str();
        body += "# eps=" + fmt(r.eps) + ",sign=" + std::to_string(r.sign) + ",I=" + fmt(r.I) + "\n";
        out.artifacts.push_back({"witness.csv", body});
        out.metrics["witness_eps"] = r.eps;
        out.metrics["witness_sign"] = r.sign;
        out.metrics["witness_I"] = r.I;
        out.metrics["extension_by_zero_I"] = r.I_base;
        out.checks["witness_negative"] = r.I < -1e-10;
    }
}

inline void scenario_maslov(const RunConfig& rc, const System& sys, int, Outcome& out) {
    const json& p = rc.resolved["params"];
    CsvTable csv({"degree", "turns", "residual", "samples", "card_P", "ok"});
    if (p.contains("curve_csv")) {
        const auto d = read_csv(rc.base_dir / p["curve_csv"].get<std::string>());
        const std::vector<std::string> want{"t", "q1", "q2", "theta", "r"};
        if (d.header != want) throw DomainError("curve CSV needs the header t,q1,q2,theta,r");
        LineField f;
        SampledCurve c;
        for (const auto& r : d.rows) {
            f.t.push_back(r[0]);
            f.r.push_back(r[4]);
            c.t.push_back(r[0]);
            c.states.push_back(TorusTangent{r[1], r[2], r[3]});
        }
        if (sys.metric && sys.metric->is_torus() && c.states.size() > 1 &&
            state_distance(*sys.metric, c.states.front(), c.states.back()) > 1e-9)
            throw PreconditionError("curve is not closed");
        const auto w = winding_degree(f);
        csv.row({static_cast<double>(w.degree), w.turns, w.residual, static_cast<double>(w.samples), std::nan(""),
                 std::nan("")});
        out.metrics["degree"] = w.degree;
        out.metrics["turns"] = w.turns;
        out.artifacts.push_back({"degree.csv", csv.str()});
        return;
    }
    const double P = p["period"];
    const auto orbit = closed_orbit(*sys.metric, sys.lambda, sys.initial.front(), P);
    const double z0 = p["section"]["z0"], dz0 = p["section"]["dz0"];
    auto z = std::make_shared<const DampedSolution>(damped_solve(orbit.orbit, z0, dz0, 0.0, P));
    const auto sec = section_from_solution(z, P, p["samples"].get<std::size_t>());
    CsvTable field({"t", "q1", "q2", "theta", "r"});
    for (std::size_t i = 0; i < sec.t.size(); ++i) {
        const auto q = state_columns(*sys.metric, orbit.orbit->state(sec.t[i]));
        field.row({sec.t[i], q[0], q[1], q[2], sec.r[i]});
    }
    out.artifacts.push_back({"section.csv", field.str()});
    const auto w = winding_degree(sec);
    const auto count = maslov_counting_check(orbit, sec);
    csv.row({static_cast<double>(w.degree), w.turns, w.residual, static_cast<double>(w.samples),
             static_cast<double>(count.card_P), count.ok ? 1.0 : 0.0});
    out.artifacts.push_back({"degree.csv", csv.str()});
    out.metrics["degree"] = w.degree;
    out.metrics["nu"] = count.nu;
    out.metrics["card_P"] = count.card_P;
    out.metrics["closure_defect"] = orbit.closure_defect;
    out.metrics["invariance_defect"] = count.invariance_defect;
    out.checks["counting_identity"] = count.ok;
}

inline void scenario_mirror(const RunConfig& rc, const System& sys, int threads, Outcome& out) {
    const json& p = rc.resolved["params"];
    const double T = p["T"];
    const auto& g = *sys.metric;
    const auto rev = reversibility_report(g, *sys.lambda, p["grid"].get<std::size_t>());
    std::vector<double> mres(sys.initial.size()), rres(sys.initial.size());
    parallel_for(sys.initial.size(), threads, [&](std::size_t i) {
        mres[i] = mirror_conjugacy_residual(g, sys.lambda, sys.initial[i], T);
        rres[i] = reversibility_residual(g, sys.lambda, sys.initial[i], T);
    });
    CsvTable csv({"v_q1", "v_q2", "v_theta", "mirror_residual", "reversibility_residual"});
    double worst_m = 0, worst_r = 0;
    for (std::size_t i = 0; i < sys.initial.size(); ++i) {
        const auto q = state_columns(g, sys.initial[i]);
        csv.row({q[0], q[1], q[2], mres[i], rres[i]});
        worst_m = std::max(worst_m, mres[i]);
        worst_r = std::max(worst_r, rres[i]);
    }
    out.artifacts.push_back({"mirror.csv", csv.str()});
    const bool direct = worst_r < 1e-7;
    out.metrics["is_reversible"] = rev.is_reversible;
    out.metrics["max_even_mode_mass"] = rev.max_even_mode_mass;
    out.metrics["max_mirror_residual"] = worst_m;
    out.metrics["max_reversibility_residual"] = worst_r;
    out.checks["mirror_conjugacy_1e-7"] = worst_m < 1e-7;
    out.checks["parity_agrees_with_direct_test"] = rev.is_reversible == direct;
}

inline void scenario_gaussian(const RunConfig& rc, const System& sys, int, Outcome& out) {
    const json& p = rc.resolved["params"];
    const auto gt = gaussian_from_curvature(*sys.metric, p["n"].get<std::size_t>(), p["n_theta"].get<std::size_t>());
    const std::size_t n = p["n"];
    CsvTable csv({"q1", "q2", "re_c1", "im_c1"});
    const auto& c1 = gt.lambda->modes().front().c;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double q1 = sys.metric->period1() * i / n, q2 = sys.metric->period2() * j / n;
            const cplx c = c1(q1, q2).v;
            csv.row({q1, q2, c.real(), c.imag()});
        }
    out.artifacts.push_back({"gaussian_c1.csv", csv.str()});
    out.metrics["area"] = gt.area;
    out.metrics["rhs_mean"] = gt.rhs_mean;
    out.metrics["hodge_mode_residual"] = gt.hodge_mode_residual;
    out.metrics["hodge_grid_residual"] = gt.hodge_grid_residual;
    out.metrics["max_abs_KK"] = gt.max_abs_KK;
    out.metrics["is_reversible"] = gt.reversibility.is_reversible;
    out.checks["KK_vanishes_1e-6"] = gt.max_abs_KK < 1e-6;
    out.checks["reversible"] = gt.reversibility.is_reversible;
    out.checks["hodge_1e-9"] = gt.hodge_mode_residual < 1e-9;
}

inline void scenario_experiment(const RunConfig& rc, const System&, int, Outcome& out) {
    const json& p = rc.resolved["params"];
    PerturbationParams prm;
    prm.T = p["T"];
    prm.eps = p["eps"];
    prm.delta = p["delta"];
    prm.k = p["k"].get<int>();
    prm.L2 = p["L2"];
    const auto r = closed_orbit_experiment(prm);
    auto opt_time = [](const ConjugateReport& c) {
        return c.first_conjugate_time ? json(*c.first_conjugate_time) : json(nullptr);
    };
    json& m = out.metrics;
    m["C"] = r.C;
    m["L1"] = r.L1;
    m["injectivity_bound"] = r.injectivity_bound;
    m["sign"] = r.sign;
    m["I_unperturbed"] = r.I_unperturbed;
    m["identity"] = r.identity;
    m["closed_form"] = r.closed_form;
    m["C_prime"] = r.C_prime;
    m["tent_bound_holds"] = r.tent_bound_holds;
    m["core_contribution"] = r.core_contribution;
    m["delta_contribution"] = r.delta_contribution;
    m["delta_misalignment"] = r.delta_misalignment;
    m["core_bound_holds"] = r.core_bound_holds;
    m["I_perturbed"] = r.I_perturbed;
    m["I_perturbed_true_orbit"] = r.I_perturbed_true_orbit;
    m["deviation_term"] = r.deviation_term;
    m["first_conjugate_time"] = opt_time(r.conjugate);
    m["first_conjugate_time_true_orbit"] = opt_time(r.conjugate_true_orbit);
    m["status"] = r.status;
    out.checks["unperturbed_equals_2_over_T_1e-8"] = std::abs(r.I_unperturbed - r.closed_form) < 1e-8;
    out.checks["identity_1e-8"] = std::abs(r.I_unperturbed - r.identity) < 1e-8;
    if (prm.eps > 0) out.checks["negative_index_with_conjugate_pair"] = r.status == "NEGATIVE_INDEX";

    CsvTable path({"t", "f_T", "kappa_tilde", "kappa_bar"});
    for (int i = 0; i <= 2000; ++i) {
        const double t = -prm.T + 2 * prm.T * i / 2000.0;
        path.row({t, (*r.tent)(t), r.core->kappa_tilde(t), r.frozen->kappa_tilde(t)});
    }
    out.artifacts.push_back({"perturbed_path.csv", path.str()});

    std::string report = "closed-orbit index experiment\n";
    for (const auto& [k, v] : m.items()) report += "  " + k + " = " + (v.is_number_float() ? fmt(v.get<double>()) : v.dump()) + "\n";
    out.artifacts.push_back({"report.txt", report});
}

} // namespace detail

/// Run one validated (non-sweep) configuration; numerical errors are caught into `error`.
inline Outcome run_scenario(const RunConfig& rc, std::uint64_t seed, int threads = 1) {
    Outcome out;
    try {
        const System sys = build_system(rc, seed);
        const std::string& s = rc.scenario;
        if (s == "integrate") detail::scenario_integrate(rc, sys, threads, out);
        else if (s == "conjugate-scan") detail::scenario_conjugate(rc, sys, threads, out);
        else if (s == "green") detail::scenario_green(rc, sys, threads, out);
        else if (s == "dominated") detail::scenario_dominated(rc, sys, threads, out);
        else if (s == "index") detail::scenario_index(rc, sys, threads, out);
        else if (s == "maslov") detail::scenario_maslov(rc, sys, threads, out);
        else if (s == "mirror-check") detail::scenario_mirror(rc, sys, threads, out);
        else if (s == "construct-gaussian") detail::scenario_gaussian(rc, sys, threads, out);
        else if (s == "perturb-experiment") detail::scenario_experiment(rc, sys, threads, out);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

inline json summary_of(const RunConfig& rc, const Outcome& o) {
    json s;
    s["scenario"] = rc.scenario;
    s["status"] = !o.error.empty() ? "failed" : (o.checks_passed() ? "ok" : "checks_failed");
    if (!o.error.empty()) s["error"] = o.error;
    s["checks"] = o.checks;
    s["metrics"] = o.metrics;
    return s;
}

inline json manifest_of(const RunConfig& rc, const std::vector<Artifact>& arts) {
    json m;
    m["tool"] = "thermoflow";
    m["version"] = tool_version;
    m["scenario"] = rc.scenario;
    m["seed"] = rc.seed;
    m["config"] = rc.resolved;
    json list = json::array();
    for (const auto& a : arts) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(a.content)));
        list.push_back(json{{"name", a.name}, {"bytes", a.content.size()}, {"fnv1a64", hex}});
    }
    m["artifacts"] = list;
    return m;
}

/// Artifacts of a full run (including summary.json and manifest) plus the exit status:
/// 0 ok, 1 numerical failure, 3 internal check failed.
struct RunResult {
    int status = 0;
    std::vector<Artifact> artifacts;
    json summary;
};

inline RunResult execute(const RunConfig& rc, int threads = 1) {
    RunResult res;
    if (!rc.resolved.contains("sweep")) {
        Outcome o = run_scenario(rc, rc.seed, threads);
        res.summary = summary_of(rc, o);
        res.artifacts = std::move(o.artifacts);
        res.status = !o.error.empty() ? 1 : (o.checks_passed() ? 0 : 3);
    } else {
        const json& sw = rc.resolved["sweep"];
        const json::json_pointer ptr(sw["parameter"].get<std::string>());
        const std::size_t n = sw["values"].size();
        std::vector<RunConfig> subs(n);
        std::vector<Outcome> outs(n);
        std::vector<std::string> cfg_errors(n);
        json base = rc.resolved;
        base.erase("sweep");
        for (std::size_t i = 0; i < n; ++i) {
            json c = base;
            c[ptr] = sw["values"][i];
            try {
                subs[i] = load_config(c.dump(2), rc.scenario, rc.base_dir);
            } catch (const ConfigError& e) {
                cfg_errors[i] = e.what();
            }
        }
        parallel_for(n, threads, [&](std::size_t i) {
            if (cfg_errors[i].empty()) outs[i] = run_scenario(subs[i], split_seed(rc.seed, i + 1), 1);
        });
        // aggregate: columns are the scalar metrics in first-seen order
        std::vector<std::string> cols;
        for (const auto& o : outs)
            for (const auto& [k, v] : o.metrics.items())
                if (v.is_primitive() && std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
        std::vector<std::string> header{"index", "value", "status"};
        header.insert(header.end(), cols.begin(), cols.end());
        CsvTable agg(header);
        json runs = json::array();
        bool all_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            std::string dir = std::to_string(i);
            dir = "run_" + std::string(dir.size() < 3 ? 3 - dir.size() : 0, '0') + dir;
            std::string status;
            if (!cfg_errors[i].empty()) status = "config_error";
            else if (!outs[i].error.empty()) status = "failed";
            else status = outs[i].checks_passed() ? "ok" : "checks_failed";
            all_ok = all_ok && status == "ok";
            const json& v = sw["values"][i];
            std::vector<std::string> cells{std::to_string(i), v.is_number() ? fmt(v.get<double>()) : v.dump(), status};
            for (const auto& k : cols) {
                const json& m = outs[i].metrics;
                if (!m.contains(k) || m[k].is_null()) cells.push_back("nan");
                else if (m[k].is_number()) cells.push_back(fmt(m[k].get<double>()));
                else if (m[k].is_boolean()) cells.push_back(m[k].get<bool>() ? "1" : "0");
                else cells.push_back(m[k].get<std::string>());
            }
            agg.row_cells(std::move(cells));
            if (cfg_errors[i].empty()) {
                for (auto& a : outs[i].artifacts) res.artifacts.push_back({dir + "/" + a.name, std::move(a.content)});
                const json s = summary_of(subs[i], outs[i]);
                res.artifacts.push_back({dir + "/summary.json", s.dump(2) + "\n"});
                res.artifacts.push_back({dir + "/manifest", manifest_of(subs[i], {}).dump(2) + "\n"});
                runs.push_back(json{{"index", i}, {"status", status}});
            } else {
                runs.push_back(json{{"index", i}, {"status", status}, {"error", cfg_errors[i]}});
            }
        }
        res.artifacts.push_back({"sweep.csv", agg.str()});
        res.summary["scenario"] = rc.scenario;
        res.summary["status"] = all_ok ? "ok" : "partial";
        res.summary["parameter"] = sw["parameter"];
        res.summary["runs"] = runs;
        res.status = all_ok ? 0 : 1;
    }
    res.artifacts.push_back({"summary.json", res.summary.dump(2) + "\n"});
    res.artifacts.push_back({"manifest", manifest_of(rc, res.artifacts).dump(2) + "\n"});
    return res;
}

/// Single collector: writes every artifact under `out`.
inline void write_artifacts(const std::filesystem::path& out, const std::vector<Artifact>& arts) {
    for (const auto& a : arts) {
        const auto path = out / a.name;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << a.content;
    }
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + p.string(), 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace thermoflow::cli
