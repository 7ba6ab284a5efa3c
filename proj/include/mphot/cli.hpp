#pragma once

// Batch front end: strict JSON job configs, dispatch, CSV/JSON emission.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-health error.
// Errors go to stderr as {"error": {"kind", "message", "details"}}.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mphot/cat_states.hpp"
#include "mphot/gaussian.hpp"
#include "mphot/io.hpp"
#include "mphot/multi_hermite.hpp"
#include "mphot/oscillator.hpp"
#include "mphot/phase_space.hpp"

namespace mphot::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kAdaptiveMassTarget = 1e-12;
inline constexpr std::size_t kMaxGridSamples = std::size_t{1} << 22;

enum class Command { gaussian_pnd, cat_pnd, cat_wigner, qfunc, transform, oscillator, hermite };

inline const std::map<std::string, Command>& command_names() {
    static const std::map<std::string, Command> names = {
        {"gaussian-pnd", Command::gaussian_pnd}, {"cat-pnd", Command::cat_pnd},       {"cat-wigner", Command::cat_wigner},
        {"qfunc", Command::qfunc},               {"transform", Command::transform},   {"oscillator", Command::oscillator},
        {"hermite", Command::hermite}};
    return names;
}

inline std::string command_name(Command c) {
    for (const auto& [k, v] : command_names()) {
        if (v == c) return k;
    }
    return "?";
}

enum class Format { csv, json };

struct GridSpec {
    double extent = 6.0;
    int points = 121;
};

struct JobConfig {
    Command command = Command::gaussian_pnd;
    json input;
    std::optional<std::string> output_path;
    Format format = Format::csv;
    std::optional<GridSpec> grid;
    std::optional<int> n_max;
    std::optional<int> cutoff;
    int workers = 1;
};

struct Issue {
    std::string pointer;
    std::string message;
};

struct ConfigResult {
    std::optional<JobConfig> config;
    std::vector<Issue> issues;
    bool ok() const { return config.has_value(); }
};

/// Thrown by run() for problems that only show up once the input is interpreted.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::invalid_argument(message), pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

// ---------------------------------------------------------------------------
// Schema checks
// ---------------------------------------------------------------------------

namespace detail {

class Checker {
public:
    explicit Checker(std::vector<Issue>& issues) : issues_(issues) {}

    void fail(const std::string& ptr, const std::string& msg) { issues_.push_back({ptr, msg}); }

    /// Object with exactly the allowed keys; reports unknown and missing ones.
    bool object(const json& j, const std::string& ptr, const std::set<std::string>& allowed, const std::set<std::string>& required) {
        if (!j.is_object()) {
            fail(ptr, "expected an object");
            return false;
        }
        for (const auto& [k, v] : j.items()) {
            if (!allowed.count(k)) fail(ptr + "/" + k, "unknown field");
        }
        for (const auto& k : required) {
            if (!j.contains(k)) fail(ptr + "/" + k, "missing required field");
        }
        return true;
    }

    bool number(const json& j, const std::string& ptr, std::optional<double> min_exclusive = std::nullopt,
                std::optional<double> min_inclusive = std::nullopt) {
        if (!j.is_number()) {
            fail(ptr, "expected a number");
            return false;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(ptr, "must be finite");
            return false;
        }
        if (min_exclusive && !(v > *min_exclusive)) {
            fail(ptr, "must be greater than " + io::format_double(*min_exclusive));
            return false;
        }
        if (min_inclusive && !(v >= *min_inclusive)) {
            fail(ptr, "must be at least " + io::format_double(*min_inclusive));
            return false;
        }
        return true;
    }

    bool integer(const json& j, const std::string& ptr, long long lo, long long hi) {
        if (!j.is_number_integer()) {
            fail(ptr, "expected an integer");
            return false;
        }
        const long long v = j.get<long long>();
        if (v < lo || v > hi) {
            fail(ptr, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return false;
        }
        return true;
    }

    bool complex_array(const json& j, const std::string& ptr) {
        if (!j.is_array() || j.empty()) {
            fail(ptr, "expected a non-empty array of complex numbers ([re, im] or real)");
            return false;
        }
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!io::is_complex_like(j[i])) {
                fail(ptr + "/" + std::to_string(i), "expected a number or [re, im]");
                ok = false;
            }
        }
        return ok;
    }

    bool number_array(const json& j, const std::string& ptr, std::optional<std::size_t> size = std::nullopt,
                      std::optional<double> min_inclusive = std::nullopt) {
        if (!j.is_array() || j.empty()) {
            fail(ptr, "expected a non-empty array of numbers");
            return false;
        }
        if (size && j.size() != *size) {
            fail(ptr, "expected " + std::to_string(*size) + " entries");
            return false;
        }
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) ok = number(j[i], ptr + "/" + std::to_string(i), std::nullopt, min_inclusive) && ok;
        return ok;
    }

    bool one_of(const json& j, const std::string& ptr, const std::set<std::string>& values) {
        if (!j.is_string() || !values.count(j.get<std::string>())) {
            std::string list;
            for (const auto& v : values) list += (list.empty() ? "" : ", ") + v;
            fail(ptr, "expected one of: " + list);
            return false;
        }
        return true;
    }

private:
    std::vector<Issue>& issues_;
};

inline void check_cat(Checker& c, const json& j, const std::string& ptr) {
    if (!c.object(j, ptr, {"alpha", "parity"}, {"alpha", "parity"})) return;
    if (j.contains("alpha")) c.complex_array(j["alpha"], ptr + "/alpha");
    if (j.contains("parity")) c.one_of(j["parity"], ptr + "/parity", {"even", "odd"});
}

inline void check_gaussian(Checker& c, const json& j, const std::string& ptr) {
    if (j.is_string()) {
        if (j.get<std::string>() != "vacuum") c.fail(ptr, "the only named state is \"vacuum\"; use an object otherwise");
        return;
    }
    if (!j.is_object()) {
        c.fail(ptr, "expected \"vacuum\", a preset object or a state document");
        return;
    }
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) {
            c.fail(ptr + "/preset", "expected one of: coherent, squeezed, thermal, vacuum");
            return;
        }
        const std::string p = j["preset"].get<std::string>();
        if (p == "vacuum") {
            if (c.object(j, ptr, {"preset", "modes"}, {"preset"}) && j.contains("modes")) c.integer(j["modes"], ptr + "/modes", 1, 8);
        } else if (p == "coherent") {
            if (c.object(j, ptr, {"preset", "alpha"}, {"preset", "alpha"}) && j.contains("alpha")) c.complex_array(j["alpha"], ptr + "/alpha");
        } else if (p == "thermal") {
            if (c.object(j, ptr, {"preset", "nbar"}, {"preset", "nbar"}) && j.contains("nbar")) {
                c.number_array(j["nbar"], ptr + "/nbar", std::nullopt, 0.0);
            }
        } else if (p == "squeezed") {
            if (c.object(j, ptr, {"preset", "r", "alpha"}, {"preset", "r"})) {
                if (j.contains("r")) c.number(j["r"], ptr + "/r");
                if (j.contains("alpha") && !io::is_complex_like(j["alpha"])) c.fail(ptr + "/alpha", "expected a number or [re, im]");
            }
        } else {
            c.fail(ptr + "/preset", "expected one of: coherent, squeezed, thermal, vacuum");
        }
        return;
    }
    if (!c.object(j, ptr, {"schema_version", "modes", "mean", "disp"}, {"modes", "mean", "disp"})) return;
    if (j.contains("schema_version")) c.integer(j["schema_version"], ptr + "/schema_version", io::kSchemaVersion, io::kSchemaVersion);
    if (!j.contains("modes") || !c.integer(j["modes"], ptr + "/modes", 1, 8)) return;
    const auto dim = static_cast<std::size_t>(2 * j["modes"].get<int>());
    if (j.contains("mean")) c.number_array(j["mean"], ptr + "/mean", dim);
    if (j.contains("disp")) {
        const auto& d = j["disp"];
        if (!d.is_array() || d.size() != dim) {
            c.fail(ptr + "/disp", "expected a " + std::to_string(dim) + " x " + std::to_string(dim) + " matrix");
        } else {
            for (std::size_t i = 0; i < dim; ++i) c.number_array(d[i], ptr + "/disp/" + std::to_string(i), dim);
        }
    }
}

/// {gaussian: ...} or {cat: ...}, exactly one.
inline void check_state_choice(Checker& c, const json& j, const std::string& ptr) {
    if (!c.object(j, ptr, {"gaussian", "cat"}, {})) return;
    const bool g = j.contains("gaussian");
    const bool k = j.contains("cat");
    if (g == k) {
        c.fail(ptr, "expected exactly one of \"gaussian\" or \"cat\"");
        return;
    }
    if (g) check_gaussian(c, j["gaussian"], ptr + "/gaussian");
    if (k) check_cat(c, j["cat"], ptr + "/cat");
}

inline void check_profile(Checker& c, const json& j, const std::string& ptr) {
    if (j.is_string()) {
        if (j.get<std::string>() != "constant") c.fail(ptr, "only \"constant\" can be given by name; other profiles need parameters");
        return;
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        c.fail(ptr, "expected \"constant\" or an object with a \"type\" field");
        return;
    }
    const std::string t = j["type"].get<std::string>();
    if (t == "constant") {
        c.object(j, ptr, {"type"}, {"type"});
    } else if (t == "step") {
        if (c.object(j, ptr, {"type", "t0", "omega_sq_after"}, {"type", "t0", "omega_sq_after"})) {
            if (j.contains("t0")) c.number(j["t0"], ptr + "/t0", 0.0);
            if (j.contains("omega_sq_after")) c.number(j["omega_sq_after"], ptr + "/omega_sq_after");
        }
    } else if (t == "ramp") {
        if (c.object(j, ptr, {"type", "t0", "t1", "omega_sq_end"}, {"type", "t0", "t1", "omega_sq_end"})) {
            if (j.contains("t0")) c.number(j["t0"], ptr + "/t0", std::nullopt, 0.0);
            if (j.contains("t1")) c.number(j["t1"], ptr + "/t1", 0.0);
            if (j.contains("omega_sq_end")) c.number(j["omega_sq_end"], ptr + "/omega_sq_end");
            if (j.contains("t0") && j.contains("t1") && j["t0"].is_number() && j["t1"].is_number() &&
                !(j["t1"].get<double>() > j["t0"].get<double>())) {
                c.fail(ptr + "/t1", "must be greater than t0");
            }
        }
    } else if (t == "sinusoidal") {
        if (c.object(j, ptr, {"type", "amplitude", "frequency"}, {"type", "amplitude", "frequency"})) {
            if (j.contains("amplitude")) c.number(j["amplitude"], ptr + "/amplitude");
            if (j.contains("frequency")) c.number(j["frequency"], ptr + "/frequency");
        }
    } else if (t == "table") {
        if (c.object(j, ptr, {"type", "times", "omega_sq"}, {"type", "times", "omega_sq"})) {
            if (j.contains("times")) c.number_array(j["times"], ptr + "/times");
            if (j.contains("omega_sq")) c.number_array(j["omega_sq"], ptr + "/omega_sq");
        }
    } else {
        c.fail(ptr + "/type", "expected one of: constant, ramp, sinusoidal, step, table");
    }
}

inline void check_matrix(Checker& c, const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) {
        c.fail(ptr, "expected a non-empty square matrix");
        return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string row_ptr = ptr + "/" + std::to_string(i);
        if (!j[i].is_array() || j[i].size() != j.size()) {
            c.fail(row_ptr, "expected a row of " + std::to_string(j.size()) + " entries");
            continue;
        }
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (!io::is_complex_like(j[i][k])) c.fail(row_ptr + "/" + std::to_string(k), "expected a number or [re, im]");
        }
    }
}

inline void check_input(Checker& c, Command cmd, const json& in) {
    const std::string ptr = "/input";
    switch (cmd) {
        case Command::gaussian_pnd: check_gaussian(c, in, ptr); break;
        case Command::cat_pnd:
        case Command::cat_wigner: check_cat(c, in, ptr); break;
        case Command::qfunc: check_state_choice(c, in, ptr); break;
        case Command::transform:
            if (c.object(in, ptr, {"state", "from", "to"}, {"state", "from", "to"})) {
                if (in.contains("state")) check_state_choice(c, in["state"], ptr + "/state");
                if (in.contains("from")) c.one_of(in["from"], ptr + "/from", {"density", "qfunc", "wigner"});
                if (in.contains("to")) c.one_of(in["to"], ptr + "/to", {"density", "qfunc", "wigner"});
            }
            break;
        case Command::oscillator:
            if (c.object(in, ptr, {"profile", "t_end", "dt", "stride"}, {"profile", "t_end"})) {
                if (in.contains("profile")) check_profile(c, in["profile"], ptr + "/profile");
                if (in.contains("t_end")) c.number(in["t_end"], ptr + "/t_end", 0.0);
                if (in.contains("dt")) c.number(in["dt"], ptr + "/dt", 0.0);
                if (in.contains("stride")) c.integer(in["stride"], ptr + "/stride", 1, 1000000000);
            }
            break;
        case Command::hermite:
            if (c.object(in, ptr, {"r", "z", "y", "n_max"}, {"r", "n_max"})) {
                if (in.contains("r")) check_matrix(c, in["r"], ptr + "/r");
                const bool hz = in.contains("z");
                const bool hy = in.contains("y");
                if (hz == hy) c.fail(ptr, "expected exactly one of \"z\" or \"y\"");
                if (hz) c.complex_array(in["z"], ptr + "/z");
                if (hy) c.complex_array(in["y"], ptr + "/y");
                if (in.contains("n_max")) {
                    const auto& n = in["n_max"];
                    if (!n.is_array() || n.empty()) {
                        c.fail(ptr + "/n_max", "expected a non-empty array of integers");
                    } else {
                        for (std::size_t i = 0; i < n.size(); ++i) c.integer(n[i], ptr + "/n_max/" + std::to_string(i), 0, kDefaultHermiteCap);
                    }
                }
            }
            break;
    }
}

}  // namespace detail

/// Checks a raw config document and reports every violation at once.
inline ConfigResult validate_config(const json& raw) {
    ConfigResult res;
    detail::Checker c(res.issues);
    if (!c.object(raw, "", {"schema_version", "command", "input", "output", "grid", "caps", "workers"}, {"command", "input"})) {
        return res;
    }
    JobConfig cfg;
    std::optional<Command> cmd;
    if (raw.contains("schema_version")) c.integer(raw["schema_version"], "/schema_version", io::kSchemaVersion, io::kSchemaVersion);
    if (raw.contains("command")) {
        const auto& names = command_names();
        if (raw["command"].is_string() && names.count(raw["command"].get<std::string>())) {
            cmd = names.at(raw["command"].get<std::string>());
        } else {
            std::string list;
            for (const auto& [k, v] : names) list += (list.empty() ? "" : ", ") + k;
            c.fail("/command", "expected one of: " + list);
        }
    }
    if (cmd && raw.contains("input")) detail::check_input(c, *cmd, raw["input"]);
    if (raw.contains("output") && c.object(raw["output"], "/output", {"path", "format"}, {})) {
        const auto& o = raw["output"];
        if (o.contains("path")) {
            if (!o["path"].is_string() || o["path"].get<std::string>().empty()) {
                c.fail("/output/path", "expected a non-empty string");
            } else {
                cfg.output_path = o["path"].get<std::string>();
            }
        }
        if (o.contains("format") && c.one_of(o["format"], "/output/format", {"csv", "json"})) {
            cfg.format = o["format"].get<std::string>() == "json" ? Format::json : Format::csv;
        }
    }
    if (raw.contains("grid") && c.object(raw["grid"], "/grid", {"extent", "points"}, {})) {
        GridSpec g;
        const auto& gj = raw["grid"];
        if (gj.contains("extent") && c.number(gj["extent"], "/grid/extent", 0.0)) g.extent = gj["extent"].get<double>();
        if (gj.contains("points") && c.integer(gj["points"], "/grid/points", 2, 4096)) g.points = gj["points"].get<int>();
        cfg.grid = g;
    }
    if (raw.contains("caps") && c.object(raw["caps"], "/caps", {"n_max", "cutoff"}, {})) {
        const auto& cj = raw["caps"];
        if (cj.contains("n_max") && c.integer(cj["n_max"], "/caps/n_max", 0, kDefaultHermiteCap)) cfg.n_max = cj["n_max"].get<int>();
        if (cj.contains("cutoff") && c.integer(cj["cutoff"], "/caps/cutoff", 0, kDefaultHermiteCap)) cfg.cutoff = cj["cutoff"].get<int>();
    }
    if (raw.contains("workers") && c.integer(raw["workers"], "/workers", 1, 256)) cfg.workers = raw["workers"].get<int>();
    if (!res.issues.empty() || !cmd) return res;
    cfg.command = *cmd;
    cfg.input = raw["input"];
    res.config = cfg;
    return res;
}

// ---------------------------------------------------------------------------
// Interpretation of validated inputs
// ---------------------------------------------------------------------------

namespace detail {

template <class Fn>
auto interpret(const std::string& ptr, Fn&& fn) {
    try {
        return fn();
    } catch (const NumericalHealthError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(ptr, e.what());
    }
}

inline gaussian::GaussianState gaussian_input(const json& j, const std::string& ptr) {
    return interpret(ptr, [&] {
        if (j.is_string()) return gaussian::GaussianState::vacuum(1);
        if (!j.contains("preset")) return io::gaussian_from_json(j);
        const std::string p = j["preset"].get<std::string>();
        if (p == "vacuum") return gaussian::GaussianState::vacuum(j.value("modes", 1));
        if (p == "coherent") return gaussian::GaussianState::coherent(io::complex_vector(j["alpha"]));
        if (p == "thermal") {
            const auto& nb = j["nbar"];
            Vec v(static_cast<Eigen::Index>(nb.size()));
            for (std::size_t i = 0; i < nb.size(); ++i) v(static_cast<Eigen::Index>(i)) = nb[i].get<double>();
            return gaussian::GaussianState::thermal(v);
        }
        return gaussian::GaussianState::squeezed(j["r"].get<double>(), j.contains("alpha") ? io::to_complex(j["alpha"]) : cplx{});
    });
}

inline cat::CatState cat_input(const json& j, const std::string& ptr) {
    return interpret(ptr, [&] { return io::cat_from_json(j); });
}

inline osc::FrequencyProfile profile_input(const json& j, const std::string& ptr) {
    return interpret(ptr, [&] {
        if (j.is_string()) return osc::FrequencyProfile::constant();
        const std::string t = j["type"].get<std::string>();
        if (t == "step") return osc::FrequencyProfile::step(j["t0"].get<double>(), j["omega_sq_after"].get<double>());
        if (t == "ramp") {
            return osc::FrequencyProfile::ramp(j["t0"].get<double>(), j["t1"].get<double>(), j["omega_sq_end"].get<double>());
        }
        if (t == "sinusoidal") return osc::FrequencyProfile::sinusoidal(j["amplitude"].get<double>(), j["frequency"].get<double>());
        if (t == "table") {
            return osc::FrequencyProfile::table(j["times"].get<std::vector<double>>(), j["omega_sq"].get<std::vector<double>>());
        }
        return osc::FrequencyProfile::constant();
    });
}

inline void check_grid_size(std::size_t samples) {
    if (samples > kMaxGridSamples) {
        throw ConfigError("/grid/points", "grid has " + std::to_string(samples) + " samples; the limit is " + std::to_string(kMaxGridSamples));
    }
}

inline std::size_t grid_samples(int dims, int points) {
    std::size_t s = 1;
    for (int d = 0; d < dims; ++d) {
        s *= static_cast<std::size_t>(points);
        if (s > kMaxGridSamples) return s;
    }
    return s;
}

/// A state that can be sampled in every representation.
struct AnyState {
    std::optional<gaussian::GaussianState> gauss;
    std::optional<cat::CatState> cat_state;

    int modes() const { return gauss ? gauss->modes() : cat_state->modes(); }

    cplx wigner(const std::vector<double>& c) const {
        const int n = modes();
        const Vec p = Eigen::Map<const Vec>(c.data(), n);
        const Vec q = Eigen::Map<const Vec>(c.data() + n, n);
        return gauss ? gaussian::wigner_eval(*gauss, p, q) : cat::wigner_function(*cat_state, p, q);
    }
    cplx density(const std::vector<double>& c) const {
        const int n = modes();
        const Vec x = Eigen::Map<const Vec>(c.data(), n);
        const Vec xp = Eigen::Map<const Vec>(c.data() + n, n);
        if (gauss) return gaussian::density_element(*gauss, x, xp);
        return cat::position_wave(*cat_state, x) * std::conj(cat::position_wave(*cat_state, xp));
    }
    cplx qfunc(const std::vector<double>& c) const {
        const int n = modes();
        CVec b(n);
        for (int k = 0; k < n; ++k) b(k) = cplx(c[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(n + k)]);
        return gauss ? gaussian::q_function(*gauss, b) : cat::q_function(*cat_state, b);
    }
};

inline AnyState state_choice(const json& j, const std::string& ptr) {
    AnyState s;
    if (j.contains("gaussian")) {
        s.gauss = gaussian_input(j["gaussian"], ptr + "/gaussian");
        gaussian::require_valid(*s.gauss);
    } else {
        s.cat_state = cat_input(j["cat"], ptr + "/cat");
    }
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

using Cell = std::variant<long long, double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct JobResult {
    std::optional<Table> table;
    std::optional<ps::GridFunction> grid;
    json diagnostics = json::object();
};

inline json provenance(const JobConfig& cfg) {
    json modules = {{"multi_hermite", kVersion}, {"gaussian", kVersion},   {"cat_states", kVersion},
                    {"phase_space", kVersion},   {"oscillator", kVersion}, {"cli", kVersion}};
    json tol = {{"symmetry", kSymmetryTolerance},
                {"uncertainty", gaussian::kUncertaintyTolerance},
                {"imag_residue_relative", gaussian::kImagResidueRelative},
                {"imag_residue_absolute", gaussian::kImagResidueAbsolute},
                {"adaptive_mass", kAdaptiveMassTarget},
                {"wronskian", osc::kWronskianTolerance},
                {"grid_tail_mass", ps::kTailMassLimit},
                {"hermiticity", ps::kHermiticityTolerance},
                {"deconvolution_gain", ps::kMaxDeconvolutionGain}};
    json echo = {{"command", command_name(cfg.command)}, {"input", cfg.input}};
    if (cfg.grid) echo["grid"] = {{"extent", cfg.grid->extent}, {"points", cfg.grid->points}};
    if (cfg.n_max) echo["caps"]["n_max"] = *cfg.n_max;
    if (cfg.cutoff) echo["caps"]["cutoff"] = *cfg.cutoff;
    return {{"schema_version", io::kSchemaVersion}, {"tool", "mphot"}, {"version", kVersion},
            {"modules", modules},                   {"tolerances", tol}, {"config", echo}};
}

namespace detail {

inline std::vector<std::string> index_columns(const char* stem, int n) {
    std::vector<std::string> cols;
    for (int k = 1; k <= n; ++k) cols.push_back(stem + std::to_string(k));
    return cols;
}

inline JobResult run_gaussian_pnd(const JobConfig& cfg) {
    const auto state = gaussian_input(cfg.input, "/input");
    const auto qp = gaussian::q_params(state);
    const int limit = cfg.cutoff.value_or(kDefaultHermiteCap);
    gaussian::DistributionTable table;
    if (cfg.n_max) {
        table = gaussian::photon_distribution_table(qp, *cfg.n_max);
    } else {
        // Smallest per-mode cap whose box holds all but 1e-12 of the probability.
        int cap = 0;
        for (;;) {
            table = gaussian::photon_distribution_table(qp, cap);
            if (table.total() >= 1.0 - kAdaptiveMassTarget || cap >= limit) break;
            cap = std::min(limit, cap == 0 ? 1 : cap + std::max(1, cap / 2));
        }
    }
    JobResult res;
    Table t;
    const int n = state.modes();
    t.columns = index_columns("n", n);
    t.columns.push_back("probability");
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const std::vector<int> ext(static_cast<std::size_t>(n), table.n_cap + 1);
    std::size_t off = 0;
    do {
        std::vector<Cell> row;
        for (int k : idx) row.emplace_back(static_cast<long long>(k));
        row.emplace_back(table.probabilities[off++]);
        t.rows.push_back(std::move(row));
    } while (mphot::detail::next_index(idx, ext));
    res.table = std::move(t);
    res.diagnostics = {{"n_cap", table.n_cap},
                       {"total_probability", table.total()},
                       {"max_imag_residue", table.max_imag_residue},
                       {"max_clipped", table.max_clipped},
                       {"vacuum_probability", qp.p0}};
    return res;
}

inline JobResult run_cat_pnd(const JobConfig& cfg) {
    const auto state = cat_input(cfg.input, "/input");
    const int n = state.modes();
    int cap = 0;
    if (cfg.n_max) {
        cap = *cfg.n_max;
    } else {
        const int limit = cfg.cutoff.value_or(kDefaultHermiteCap);
        double mass = 0.0;
        for (cap = 0; cap < limit; ++cap) {
            mass = 0.0;
            std::vector<int> idx(static_cast<std::size_t>(n), 0);
            const std::vector<int> ext(static_cast<std::size_t>(n), cap + 1);
            do {
                mass += cat::photon_distribution(state, MultiIndex(idx));
            } while (mphot::detail::next_index(idx, ext));
            if (mass >= 1.0 - kAdaptiveMassTarget) break;
        }
    }
    check_grid_size(grid_samples(n, cap + 1));
    JobResult res;
    Table t;
    t.columns = index_columns("n", n);
    t.columns.push_back("probability");
    double total = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const std::vector<int> ext(static_cast<std::size_t>(n), cap + 1);
    do {
        std::vector<Cell> row;
        for (int k : idx) row.emplace_back(static_cast<long long>(k));
        const double p = cat::photon_distribution(state, MultiIndex(idx));
        total += p;
        row.emplace_back(p);
        t.rows.push_back(std::move(row));
    } while (mphot::detail::next_index(idx, ext));
    res.table = std::move(t);
    json means = json::array();
    for (int i = 0; i < n; ++i) means.push_back(cat::mean_photon(state, i));
    res.diagnostics = {{"n_cap", cap}, {"total_probability", total}, {"normalization", cat::normalization(state)}, {"mean_photon", means}};
    return res;
}

inline GridSpec grid_or(const JobConfig& cfg, double extent, int points) {
    return cfg.grid.value_or(GridSpec{extent, points});
}

inline JobResult run_cat_wigner(const JobConfig& cfg) {
    const auto state = cat_input(cfg.input, "/input");
    const auto g = grid_or(cfg, 6.0, 121);
    check_grid_size(grid_samples(2 * state.modes(), g.points));
    const std::vector<ps::Axis> axes(static_cast<std::size_t>(2 * state.modes()), ps::Axis::symmetric(g.extent, g.points));
    JobResult res;
    res.grid = ps::GridFunction::sample(
        ps::Representation::wigner, axes,
        [&](const std::vector<double>& c) {
            const int n = state.modes();
            return cplx(cat::wigner_function(state, Eigen::Map<const Vec>(c.data(), n), Eigen::Map<const Vec>(c.data() + n, n)));
        },
        cfg.workers);
    return res;
}

inline JobResult run_qfunc(const JobConfig& cfg) {
    const auto state = state_choice(cfg.input, "/input");
    const auto g = grid_or(cfg, 4.0, 81);
    check_grid_size(grid_samples(2 * state.modes(), g.points));
    const std::vector<ps::Axis> axes(static_cast<std::size_t>(2 * state.modes()), ps::Axis::symmetric(g.extent, g.points));
    JobResult res;
    res.grid = ps::GridFunction::sample(
        ps::Representation::qfunc, axes, [&](const std::vector<double>& c) { return state.qfunc(c); }, cfg.workers);
    return res;
}

inline JobResult run_transform(const JobConfig& cfg) {
    const auto state = state_choice(cfg.input["state"], "/input/state");
    const std::string from = cfg.input["from"].get<std::string>();
    const std::string to = cfg.input["to"].get<std::string>();
    const int n = state.modes();
    if (from == to) throw ConfigError("/input/to", "source and target representations coincide");
    const bool q_involved = from == "qfunc" || to == "qfunc";
    if (q_involved && n != 1) throw ConfigError("/input/state", "transforms involving the Q-function are single-mode");
    if (n > 2) throw ConfigError("/input/state", "grid transforms support at most two modes");
    const auto g = grid_or(cfg, 6.0, 129);
    check_grid_size(grid_samples(2 * n, g.points));
    const ps::Axis axis = ps::Axis::symmetric(g.extent, g.points);
    const std::vector<ps::Axis> axes(static_cast<std::size_t>(2 * n), axis);
    const int w = cfg.workers;

    JobResult res;
    if (from == "density") {
        const auto rho = ps::GridFunction::sample(ps::Representation::density, axes, [&](const auto& c) { return state.density(c); }, w);
        const auto wig = ps::wigner_from_density(rho, axis, w);
        if (to == "wigner") {
            res.grid = wig;
        } else {
            const ps::Axis b = ps::Axis::symmetric(g.extent / std::sqrt(2.0), g.points);
            res.grid = ps::q_from_wigner(wig, b, b, w);
        }
    } else if (from == "wigner") {
        const auto wig = ps::GridFunction::sample(ps::Representation::wigner, axes, [&](const auto& c) { return state.wigner(c); }, w);
        if (to == "density") {
            res.grid = ps::density_from_wigner(wig, w);
        } else {
            const ps::Axis b = ps::Axis::symmetric(g.extent / std::sqrt(2.0), g.points);
            res.grid = ps::q_from_wigner(wig, b, b, w);
        }
    } else {
        const auto q = ps::GridFunction::sample(ps::Representation::qfunc, axes, [&](const auto& c) { return state.qfunc(c); }, w);
        res.grid = to == "wigner" ? ps::wigner_from_q(q, w) : ps::density_from_q(q, w);
    }
    res.diagnostics = {{"max_imag", res.grid->max_imag()}};
    return res;
}

inline JobResult run_oscillator(const JobConfig& cfg) {
    const auto& in = cfg.input;
    const auto profile = profile_input(in["profile"], "/input/profile");
    const double t_end = in["t_end"].get<double>();
    const double dt = in.value("dt", 1e-3);
    const int stride = in.value("stride", 1);
    if (t_end / dt > 1e8) throw ConfigError("/input/dt", "more than 1e8 steps requested");
    const auto traj = osc::solve_epsilon(profile, t_end, dt);
    JobResult res;
    Table t;
    t.columns = {"t", "re_eps", "im_eps", "re_eps_dot", "im_eps_dot", "sigma_x", "sigma_p", "r"};
    const auto& samples = traj.samples();
    for (std::size_t k = 0; k < samples.size(); k += static_cast<std::size_t>(stride)) {
        const auto& s = samples[k];
        const auto v = osc::variances(s);
        t.rows.push_back({s.t, s.eps.real(), s.eps.imag(), s.eps_dot.real(), s.eps_dot.imag(), v.sigma_x, v.sigma_p, v.r});
    }
    res.table = std::move(t);
    res.diagnostics = {{"steps", samples.size() - 1}, {"max_wronskian_drift", traj.max_wronskian_drift()}};
    return res;
}

inline JobResult run_hermite(const JobConfig& cfg) {
    const auto& in = cfg.input;
    const auto& rj = in["r"];
    const auto d = static_cast<Eigen::Index>(rj.size());
    CMat r(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) r(i, k) = io::to_complex(rj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    const bool has_z = in.contains("z");
    const CVec v = io::complex_vector(has_z ? in["z"] : in["y"]);
    const auto nmax = in["n_max"].get<std::vector<int>>();
    if (v.size() != d) throw ConfigError(has_z ? "/input/z" : "/input/y", "length must match the dimension of r");
    if (static_cast<Eigen::Index>(nmax.size()) != d) throw ConfigError("/input/n_max", "length must match the dimension of r");
    const HermiteSpec spec = interpret("/input/r", [&] { return has_z ? HermiteSpec(r, v) : HermiteSpec::from_argument(r, v); });
    std::vector<int> ext;
    for (int k : nmax) ext.push_back(k + 1);
    check_grid_size(mphot::detail::box_volume(ext));
    const HermiteTable table(spec, MultiIndex(nmax));
    JobResult res;
    Table t;
    t.columns = index_columns("n", static_cast<int>(d));
    t.columns.push_back("re");
    t.columns.push_back("im");
    std::vector<int> idx(nmax.size(), 0);
    std::size_t off = 0;
    do {
        std::vector<Cell> row;
        for (int k : idx) row.emplace_back(static_cast<long long>(k));
        row.emplace_back(table.values()[off].real());
        row.emplace_back(table.values()[off].imag());
        ++off;
        t.rows.push_back(std::move(row));
    } while (mphot::detail::next_index(idx, ext));
    res.table = std::move(t);
    return res;
}

}  // namespace detail

inline JobResult execute(const JobConfig& cfg) {
    switch (cfg.command) {
        case Command::gaussian_pnd: return detail::run_gaussian_pnd(cfg);
        case Command::cat_pnd: return detail::run_cat_pnd(cfg);
        case Command::cat_wigner: return detail::run_cat_wigner(cfg);
        case Command::qfunc: return detail::run_qfunc(cfg);
        case Command::transform: return detail::run_transform(cfg);
        case Command::oscillator: return detail::run_oscillator(cfg);
        case Command::hermite: return detail::run_hermite(cfg);
    }
    throw std::logic_error("unhandled command");
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline void write_table_csv(std::ostream& out, const Table& t) {
    io::CsvWriter csv(out);
    csv.header(t.columns);
    for (const auto& row : t.rows) {
        for (const auto& c : row) std::visit([&](auto v) { csv.cell(v); }, c);
        csv.end_row();
    }
}

inline json result_json(const JobConfig& cfg, const JobResult& r) {
    json j = {{"provenance", provenance(cfg)}, {"command", command_name(cfg.command)}, {"diagnostics", r.diagnostics}};
    if (r.table) {
        j["columns"] = r.table->columns;
        json rows = json::array();
        for (const auto& row : r.table->rows) {
            json jr = json::array();
            for (const auto& c : row) std::visit([&](auto v) { jr.push_back(v); }, c);
            rows.push_back(jr);
        }
        j["rows"] = rows;
    }
    if (r.grid) j["grid"] = io::grid_json(*r.grid);
    return j;
}

/// Writes the result to `out`; grid CSVs also get `<path>.axes.json` when a path is known.
inline void emit(const JobConfig& cfg, const JobResult& r, std::ostream& out, const std::optional<std::string>& path) {
    if (cfg.format == Format::json) {
        out << result_json(cfg, r).dump(2) << '\n';
        return;
    }
    if (r.table) write_table_csv(out, *r.table);
    if (r.grid) {
        io::write_grid_csv(out, *r.grid);
        if (path) {
            std::ofstream side(*path + ".axes.json", std::ios::binary);
            if (!side) throw ConfigError("/output/path", "cannot write " + *path + ".axes.json");
            json sj = io::axes_json(*r.grid);
            sj["provenance"] = provenance(cfg);
            side << sj.dump(2) << '\n';
        }
    }
}

inline json error_json(const std::string& kind, const std::string& message, const json& details = json::array()) {
    return {{"error", {{"kind", kind}, {"message", message}, {"details", details}}}};
}

inline json issues_json(const std::vector<Issue>& issues) {
    json d = json::array();
    for (const auto& i : issues) d.push_back({{"pointer", i.pointer}, {"message", i.message}});
    return d;
}

/// Runs a validated job, writing artifacts and returning the exit status.
inline int run(const JobConfig& cfg, std::ostream& err) {
    try {
        const JobResult r = execute(cfg);
        if (cfg.output_path) {
            std::ofstream out(*cfg.output_path, std::ios::binary);
            if (!out) throw ConfigError("/output/path", "cannot open " + *cfg.output_path + " for writing");
            emit(cfg, r, out, cfg.output_path);
        } else {
            emit(cfg, r, std::cout, std::nullopt);
        }
        return 0;
    } catch (const ConfigError& e) {
        err << error_json("config", e.what(), issues_json({{e.pointer(), e.what()}})).dump() << '\n';
        return 2;
    } catch (const NumericalHealthError& e) {
        err << error_json("numerical", e.what()).dump() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        err << error_json("config", e.what()).dump() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        err << error_json("config", e.what()).dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << '\n';
        return 1;
    }
}

/// Command-line entry: mphot --config job.json [--out path] [--format csv|json] [--workers k]
inline int main_entry(int argc, char** argv) {
    CLI::App app{"mphot: photon statistics and phase-space functions of Gaussian and cat states"};
    std::string config_path;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    std::optional<int> workers;
    app.add_option("--config", config_path, "JSON job configuration")->required();
    app.add_option("--out", out_path, "output path (default: config output.path, else stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", workers, "worker threads (default: MPHOT_WORKERS or 1)")->check(CLI::Range(1, 256));
    app.set_version_flag("--version", kVersion);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << error_json("config", e.what()).dump() << '\n';
        return 2;
    }

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << error_json("config", "cannot read " + config_path).dump() << '\n';
        return 2;
    }
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << error_json("config", std::string("invalid JSON: ") + e.what()).dump() << '\n';
        return 2;
    }
    auto res = validate_config(raw);
    if (!res.ok()) {
        std::cerr << error_json("config", "configuration rejected", issues_json(res.issues)).dump() << '\n';
        return 2;
    }
    JobConfig cfg = *res.config;
    if (out_path) cfg.output_path = *out_path;
    if (format) cfg.format = *format == "json" ? Format::json : Format::csv;
    if (workers) {
        cfg.workers = *workers;
    } else if (!raw.contains("workers")) {
        if (const char* env = std::getenv("MPHOT_WORKERS")) {
            const int w = std::atoi(env);
            if (w < 1 || w > 256) {
                std::cerr << error_json("config", "MPHOT_WORKERS must be an integer in [1, 256]").dump() << '\n';
                return 2;
            }
            cfg.workers = w;
        }
    }
    return run(cfg, std::cerr);
}

}  // namespace mphot::cli
