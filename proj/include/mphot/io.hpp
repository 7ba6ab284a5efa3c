#pragma once

// JSON documents for states and grids, and byte-stable CSV formatting.
// Requires nlohmann/json (vendor/json.hpp) on the include path.

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mphot/cat_states.hpp"
#include "mphot/common.hpp"
#include "mphot/gaussian.hpp"
#include "mphot/phase_space.hpp"

namespace mphot::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest text that round-trips at 17 significant digits; identical on every run.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0 into 0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Rows of numbers joined by ',' and terminated by '\n'.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }

    CsvWriter& cell(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvWriter& cell(long long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }

    std::ostream& out_;
    bool first_ = true;
};

// ---------------------------------------------------------------------------
// Complex numbers: either a plain number or [re, im]
// ---------------------------------------------------------------------------

inline bool is_complex_like(const json& j) {
    return j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number());
}

inline cplx to_complex(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!is_complex_like(j)) throw std::invalid_argument("expected a number or [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json from_complex(cplx z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------------------
// Gaussian states: {schema_version, modes, mean, disp}
// ---------------------------------------------------------------------------

inline json to_json(const gaussian::GaussianState& s) {
    json mean = json::array();
    for (Eigen::Index i = 0; i < s.mean().size(); ++i) mean.push_back(s.mean()(i));
    json disp = json::array();
    for (Eigen::Index i = 0; i < s.disp().rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < s.disp().cols(); ++j) row.push_back(s.disp()(i, j));
        disp.push_back(row);
    }
    return {{"schema_version", kSchemaVersion}, {"modes", s.modes()}, {"mean", mean}, {"disp", disp}};
}

inline gaussian::GaussianState gaussian_from_json(const json& j) {
    const int n = j.at("modes").get<int>();
    if (n < 1) throw std::invalid_argument("modes must be positive");
    const auto& mj = j.at("mean");
    const auto& dj = j.at("disp");
    if (!mj.is_array() || mj.size() != static_cast<std::size_t>(2 * n)) throw std::invalid_argument("mean must have 2N entries");
    if (!dj.is_array() || dj.size() != static_cast<std::size_t>(2 * n)) throw std::invalid_argument("disp must be 2N x 2N");
    Vec mean(2 * n);
    Mat disp(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        mean(i) = mj[static_cast<std::size_t>(i)].get<double>();
        const auto& row = dj[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(2 * n)) throw std::invalid_argument("disp must be 2N x 2N");
        for (int k = 0; k < 2 * n; ++k) disp(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return gaussian::GaussianState(mean, disp);
}

// ---------------------------------------------------------------------------
// Cat states: {alpha: [[re, im], ...], parity}
// ---------------------------------------------------------------------------

inline json to_json(const cat::CatState& s) {
    json alpha = json::array();
    for (Eigen::Index i = 0; i < s.alpha().size(); ++i) alpha.push_back(from_complex(s.alpha()(i)));
    return {{"alpha", alpha}, {"parity", cat::to_string(s.parity())}};
}

inline CVec complex_vector(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty array of complex numbers");
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_complex(j[i]);
    return v;
}

inline cat::CatState cat_from_json(const json& j) {
    return cat::CatState(complex_vector(j.at("alpha")), cat::parse_parity(j.at("parity").get<std::string>()));
}

// ---------------------------------------------------------------------------
// Grid functions: CSV values (coordinates..., re, im) plus a JSON axes sidecar
// ---------------------------------------------------------------------------

inline std::vector<std::string> axis_names(const ps::GridFunction& g) {
    const int n = g.modes();
    std::vector<std::string> names;
    auto add = [&](const char* stem) {
        for (int m = 1; m <= n; ++m) names.push_back(stem + std::to_string(m));
    };
    switch (g.representation()) {
        case ps::Representation::wigner:
            add("p");
            add("q");
            break;
        case ps::Representation::density:
            add("x");
            add("xp");
            break;
        case ps::Representation::qfunc:
            add("re_beta");
            add("im_beta");
            break;
    }
    return names;
}

inline json axes_json(const ps::GridFunction& g) {
    json axes = json::array();
    const auto names = axis_names(g);
    for (std::size_t k = 0; k < g.axes().size(); ++k) {
        const auto& a = g.axes()[k];
        axes.push_back({{"name", names[k]}, {"start", a.start}, {"step", a.step}, {"count", a.count}});
    }
    return {{"schema_version", kSchemaVersion}, {"representation", ps::to_string(g.representation())}, {"layout", "row-major"},
            {"axes", axes}};
}

inline void write_grid_csv(std::ostream& out, const ps::GridFunction& g) {
    CsvWriter csv(out);
    auto cols = axis_names(g);
    cols.push_back("re");
    cols.push_back("im");
    csv.header(cols);
    for (std::size_t f = 0; f < g.size(); ++f) {
        for (double c : g.coords(f)) csv.cell(c);
        csv.cell(g.values()[f].real()).cell(g.values()[f].imag());
        csv.end_row();
    }
}

inline json grid_json(const ps::GridFunction& g) {
    json j = axes_json(g);
    json vals = json::array();
    for (const auto& v : g.values()) vals.push_back(from_complex(v));
    j["values"] = vals;
    return j;
}

inline ps::GridFunction grid_from_json(const json& j) {
    std::vector<ps::Axis> axes;
    for (const auto& a : j.at("axes")) {
        axes.push_back(ps::Axis{a.at("start").get<double>(), a.at("step").get<double>(), a.at("count").get<int>()});
    }
    std::vector<cplx> vals;
    for (const auto& v : j.at("values")) vals.push_back(to_complex(v));
    return ps::GridFunction(ps::parse_representation(j.at("representation").get<std::string>()), axes, vals);
}

}  // namespace mphot::io
