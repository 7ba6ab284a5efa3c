#pragma once

// Grid transforms among the coordinate density matrix rho(x, x'), the Wigner
// function W(p, q) and the Q-function, plus replacement evolution under
// linear canonical maps.
//
// Layouts (row-major, first axis slowest):
//   wigner   (p_1..p_N, q_1..q_N)
//   density  (x_1..x_N, x'_1..x'_N)
//   qfunc    (Re beta_1..Re beta_N, Im beta_1..Im beta_N)
// The Wigner normalization is  int W dp dq / (2 pi)^N = 1.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mphot/common.hpp"
#include "mphot/parallel.hpp"
#include "mphot/symplectic.hpp"

namespace mphot::ps {

inline constexpr double kHermiticityTolerance = 1e-8;
inline constexpr double kTailMassLimit = 1e-6;
inline constexpr double kMaxDeconvolutionGain = 1e8;

enum class Representation { wigner, qfunc, density };

inline const char* to_string(Representation r) {
    switch (r) {
        case Representation::wigner: return "wigner";
        case Representation::qfunc: return "qfunc";
        default: return "density";
    }
}

inline Representation parse_representation(const std::string& s) {
    if (s == "wigner") return Representation::wigner;
    if (s == "qfunc") return Representation::qfunc;
    if (s == "density") return Representation::density;
    throw std::invalid_argument("unknown representation \"" + s + "\"");
}

/// Uniform sample points start + i * step, i in [0, count).
struct Axis {
    double start = 0.0;
    double step = 1.0;
    int count = 1;

    /// count points spanning [-extent, extent] inclusive.
    static Axis symmetric(double extent, int count) {
        if (!(extent > 0.0) || count < 2) throw std::invalid_argument("Axis: need extent > 0 and at least two points");
        return Axis{-extent, 2.0 * extent / (count - 1), count};
    }

    double at(int i) const { return start + i * step; }
    double last() const { return at(count - 1); }

    Axis scaled(double f) const { return Axis{start * f, step * f, count}; }

    void validate() const {
        if (count < 2 || !(step > 0.0) || !std::isfinite(start) || !std::isfinite(step)) {
            throw std::invalid_argument("Axis: need at least two points and a positive finite step");
        }
    }

    friend bool operator==(const Axis& a, const Axis& b) {
        return a.count == b.count && std::abs(a.start - b.start) <= 1e-12 * std::max(1.0, std::abs(a.start)) &&
               std::abs(a.step - b.step) <= 1e-12 * a.step;
    }
};

class GridFunction {
public:
    GridFunction(Representation rep, std::vector<Axis> axes, std::vector<cplx> values)
        : rep_(rep), axes_(std::move(axes)), values_(std::move(values)) {
        if (axes_.empty() || axes_.size() % 2 != 0) throw std::invalid_argument("GridFunction: need 2N axes");
        for (const auto& a : axes_) a.validate();
        if (values_.size() != mphot::detail::box_volume(extents())) {
            throw std::invalid_argument("GridFunction: value count does not match the axes");
        }
    }

    template <class Fn>
    static GridFunction sample(Representation rep, std::vector<Axis> axes, Fn&& fn, int workers = 1) {
        GridFunction g(rep, axes, std::vector<cplx>(box_size(axes)));
        parallel_for(g.values_.size(), workers, [&](std::size_t i) { g.values_[i] = fn(g.coords(i)); });
        return g;
    }

    Representation representation() const { return rep_; }
    const std::vector<Axis>& axes() const { return axes_; }
    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }
    int modes() const { return static_cast<int>(axes_.size() / 2); }
    std::size_t size() const { return values_.size(); }

    std::vector<int> extents() const {
        std::vector<int> e;
        for (const auto& a : axes_) e.push_back(a.count);
        return e;
    }

    std::vector<int> index(std::size_t flat) const {
        std::vector<int> idx(axes_.size());
        for (std::size_t k = axes_.size(); k-- > 0;) {
            idx[k] = static_cast<int>(flat % static_cast<std::size_t>(axes_[k].count));
            flat /= static_cast<std::size_t>(axes_[k].count);
        }
        return idx;
    }

    std::size_t flat(const std::vector<int>& idx) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < axes_.size(); ++k) off = off * static_cast<std::size_t>(axes_[k].count) + static_cast<std::size_t>(idx[k]);
        return off;
    }

    std::vector<double> coords(std::size_t flat_index) const {
        const auto idx = index(flat_index);
        std::vector<double> c(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) c[k] = axes_[k].at(idx[k]);
        return c;
    }

    cplx operator()(const std::vector<int>& idx) const { return values_[flat(idx)]; }

    double cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes_) v *= a.step;
        return v;
    }

    /// Rectangle-rule integral of the samples.
    cplx sum_integral() const {
        cplx s = 0.0;
        for (const auto& v : values_) s += v;
        return s * cell_volume();
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double max_imag() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v.imag()));
        return m;
    }

private:
    static std::size_t box_size(const std::vector<Axis>& axes) {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
        return n;
    }

    Representation rep_;
    std::vector<Axis> axes_;
    std::vector<cplx> values_;
};

namespace detail {

inline void require(const GridFunction& g, Representation rep, const char* what) {
    if (g.representation() != rep) {
        throw std::invalid_argument(std::string(what) + ": input must be a " + to_string(rep) + " grid");
    }
}

/// Apply `fn` (CMat -> CMat) to every 2-D slice over axes (a, b) of a row-major
/// tensor, producing a tensor whose extents along a and b become (na, nb).
template <class Fn>
std::vector<cplx> map_pair(const std::vector<cplx>& in, const std::vector<int>& ext, std::size_t a, std::size_t b, int na,
                           int nb, Fn&& fn, int workers) {
    std::vector<int> out_ext = ext;
    out_ext[a] = na;
    out_ext[b] = nb;
    const auto in_str = mphot::detail::strides_for(ext);
    const auto out_str = mphot::detail::strides_for(out_ext);
    std::vector<cplx> out(mphot::detail::box_volume(out_ext));

    // Enumerate the remaining axes.
    std::vector<int> rest_ext = ext;
    rest_ext[a] = 1;
    rest_ext[b] = 1;
    std::vector<std::vector<int>> bases;
    std::vector<int> idx(ext.size(), 0);
    do {
        bases.push_back(idx);
    } while (mphot::detail::next_index(idx, rest_ext));

    parallel_for(bases.size(), workers, [&](std::size_t t) {
        const auto& base = bases[t];
        std::size_t in_off = 0;
        std::size_t out_off = 0;
        for (std::size_t k = 0; k < ext.size(); ++k) {
            in_off += static_cast<std::size_t>(base[k]) * in_str[k];
            out_off += static_cast<std::size_t>(base[k]) * out_str[k];
        }
        CMat slice(ext[a], ext[b]);
        for (int i = 0; i < ext[a]; ++i)
            for (int j = 0; j < ext[b]; ++j)
                slice(i, j) = in[in_off + static_cast<std::size_t>(i) * in_str[a] + static_cast<std::size_t>(j) * in_str[b]];
        const CMat res = fn(slice);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                out[out_off + static_cast<std::size_t>(i) * out_str[a] + static_cast<std::size_t>(j) * out_str[b]] = res(i, j);
    });
    return out;
}

/// Reorder tensor axes: out axis k is input axis perm[k].
inline std::vector<cplx> permute(const std::vector<cplx>& in, const std::vector<int>& ext, const std::vector<std::size_t>& perm,
                                 std::vector<int>& out_ext) {
    out_ext.assign(perm.size(), 0);
    for (std::size_t k = 0; k < perm.size(); ++k) out_ext[k] = ext[perm[k]];
    const auto in_str = mphot::detail::strides_for(ext);
    std::vector<cplx> out(in.size());
    std::vector<int> idx(perm.size(), 0);
    std::size_t o = 0;
    do {
        std::size_t off = 0;
        for (std::size_t k = 0; k < perm.size(); ++k) off += static_cast<std::size_t>(idx[k]) * in_str[perm[k]];
        out[o++] = in[off];
    } while (mphot::detail::next_index(idx, out_ext));
    return out;
}

/// (block_1 .. block_N, other_1 .. other_N) <-> (block_1, other_1, .., block_N, other_N)
inline std::vector<std::size_t> to_pairs(std::size_t n) {
    std::vector<std::size_t> p;
    for (std::size_t m = 0; m < n; ++m) {
        p.push_back(m);
        p.push_back(n + m);
    }
    return p;
}
inline std::vector<std::size_t> from_pairs(std::size_t n) {
    std::vector<std::size_t> p(2 * n);
    for (std::size_t m = 0; m < n; ++m) {
        p[m] = 2 * m;
        p[n + m] = 2 * m + 1;
    }
    return p;
}

inline void check_density_axes(const GridFunction& rho, const char* what) {
    const int n = rho.modes();
    for (int m = 0; m < n; ++m) {
        if (!(rho.axes()[static_cast<std::size_t>(m)] == rho.axes()[static_cast<std::size_t>(n + m)])) {
            throw std::invalid_argument(std::string(what) + ": x and x' axes must coincide for every mode");
        }
    }
}

/// max |rho(x, x') - conj rho(x', x)| relative to max(1, max|rho|).
inline double hermiticity_defect(const GridFunction& rho) {
    const std::size_t n = static_cast<std::size_t>(rho.modes());
    double d = 0.0;
    for (std::size_t f = 0; f < rho.size(); ++f) {
        auto idx = rho.index(f);
        std::vector<int> swapped(idx.size());
        for (std::size_t m = 0; m < n; ++m) {
            swapped[m] = idx[n + m];
            swapped[n + m] = idx[m];
        }
        d = std::max(d, std::abs(rho.values()[f] - std::conj(rho(swapped))));
    }
    return d / std::max(1.0, rho.max_abs());
}

/// Probability carried by diagonal points that touch the edge of the x-box.
inline double density_edge_mass(const GridFunction& rho) {
    const std::size_t n = static_cast<std::size_t>(rho.modes());
    std::vector<int> ext;
    double cell = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
        ext.push_back(rho.axes()[m].count);
        cell *= rho.axes()[m].step;
    }
    std::vector<int> idx(n, 0);
    double mass = 0.0;
    do {
        bool edge = false;
        for (std::size_t m = 0; m < n; ++m) edge = edge || idx[m] == 0 || idx[m] == ext[m] - 1;
        if (!edge) continue;
        std::vector<int> full(idx);
        full.insert(full.end(), idx.begin(), idx.end());
        mass += std::abs(rho(full));
    } while (mphot::detail::next_index(idx, ext));
    return mass * cell;
}

/// Integral of |f| / (2 pi)^N over samples lying on the boundary of the grid box.
/// Real n x n matrix taking samples f(j) to the trigonometric interpolant at
/// j + 1/2. The Nyquist term of an even-length grid is dropped.
inline CMat half_step_shift(int n) {
    CMat h = CMat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
            // 1 + 2 sum_{k=1..K} cos(k t) = sin((K + 1/2) t) / sin(t / 2), K = ceil(n/2) - 1
            const double t = 2.0 * pi * (j + 0.5 - l) / n;
            const int kmax = (n - 1) / 2;
            h(j, l) = std::sin((kmax + 0.5) * t) / std::sin(0.5 * t) / n;
        }
    }
    return h;
}

inline double boundary_mass(const GridFunction& g, double norm) {
    const auto ext = g.extents();
    double mass = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto idx = g.index(f);
        bool edge = false;
        for (std::size_t k = 0; k < idx.size(); ++k) edge = edge || idx[k] == 0 || idx[k] == ext[k] - 1;
        if (edge) mass += std::abs(g.values()[f]);
    }
    return mass * g.cell_volume() / norm;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density matrix <-> Wigner function
// ---------------------------------------------------------------------------

/// W(p, q) = int rho(q + u/2, q - u/2) e^{-ipu} du, sampled with u = 2kh on the
/// x-grid (spacing h); the q axes of the result are the x axes of rho.
inline GridFunction wigner_from_density(const GridFunction& rho, const Axis& p_axis, int workers = 1) {
    detail::require(rho, Representation::density, "wigner_from_density");
    p_axis.validate();
    const int n = rho.modes();
    if (n > 2) throw std::invalid_argument("wigner_from_density: at most two modes");
    detail::check_density_axes(rho, "wigner_from_density");
    const double herm = detail::hermiticity_defect(rho);
    if (herm > kHermiticityTolerance) {
        throw NumericalHealthError("wigner_from_density: density matrix is not Hermitian (defect " + std::to_string(herm) + ")");
    }
    const double tail = detail::density_edge_mass(rho);
    if (tail > kTailMassLimit) {
        throw NumericalHealthError("wigner_from_density: insufficient grid support (edge mass " + std::to_string(tail) + ")");
    }

    std::vector<int> ext;
    std::vector<cplx> work = detail::permute(rho.values(), rho.extents(), detail::to_pairs(static_cast<std::size_t>(n)), ext);
    for (int m = 0; m < n; ++m) {
        const Axis& xa = rho.axes()[static_cast<std::size_t>(m)];
        const int nx = xa.count;
        const double h = xa.step;
        CMat phase(p_axis.count, 2 * nx - 1);  // column k + nx - 1 holds e^{-i p 2kh}
        for (int i = 0; i < p_axis.count; ++i)
            for (int k = -(nx - 1); k <= nx - 1; ++k) phase(i, k + nx - 1) = std::polar(2.0 * h, -p_axis.at(i) * 2.0 * k * h);
        auto kernel = [&](const CMat& s) {
            CMat out(p_axis.count, nx);
            for (int j = 0; j < nx; ++j) {
                const int kmax = std::min(j, nx - 1 - j);
                CVec anti(2 * kmax + 1);
                for (int k = -kmax; k <= kmax; ++k) anti(k + kmax) = s(j + k, j - k);
                out.col(j) = phase.middleCols(nx - 1 - kmax, 2 * kmax + 1) * anti;
            }
            return out;
        };
        work = detail::map_pair(work, ext, static_cast<std::size_t>(2 * m), static_cast<std::size_t>(2 * m + 1), p_axis.count, nx,
                                kernel, workers);
        ext[static_cast<std::size_t>(2 * m)] = p_axis.count;
    }
    std::vector<int> out_ext;
    std::vector<cplx> vals = detail::permute(work, ext, detail::from_pairs(static_cast<std::size_t>(n)), out_ext);
    std::vector<Axis> axes;
    for (int m = 0; m < n; ++m) axes.push_back(p_axis);
    for (int m = 0; m < n; ++m) axes.push_back(rho.axes()[static_cast<std::size_t>(m)]);
    return GridFunction(Representation::wigner, std::move(axes), std::move(vals));
}

/// rho(x, x') = (2 pi)^{-N} int W(p, (x + x')/2) e^{ip(x - x')} dp on the q-grid
/// of W. Midpoints between q samples come from a trigonometric half-step shift,
/// which is accurate because W decays to the tail limit at the grid edge.
inline GridFunction density_from_wigner(const GridFunction& w, int workers = 1) {
    detail::require(w, Representation::wigner, "density_from_wigner");
    const int n = w.modes();
    if (n > 2) throw std::invalid_argument("density_from_wigner: at most two modes");
    const double edge = detail::boundary_mass(w, std::pow(2.0 * pi, n));
    if (edge > kTailMassLimit) {
        throw NumericalHealthError("density_from_wigner: insufficient grid support (edge mass " + std::to_string(edge) + ")");
    }

    std::vector<int> ext;
    std::vector<cplx> work = detail::permute(w.values(), w.extents(), detail::to_pairs(static_cast<std::size_t>(n)), ext);
    for (int m = 0; m < n; ++m) {
        const Axis& pa = w.axes()[static_cast<std::size_t>(m)];
        const Axis& qa = w.axes()[static_cast<std::size_t>(n + m)];
        const int nq = qa.count;
        const double h = qa.step;
        CMat phase(pa.count, 2 * nq - 1);  // column d + nq - 1 holds e^{i p d h} dp / 2pi
        for (int i = 0; i < pa.count; ++i)
            for (int d = -(nq - 1); d <= nq - 1; ++d) phase(i, d + nq - 1) = std::polar(pa.step / (2.0 * pi), pa.at(i) * d * h);
        const CMat half = detail::half_step_shift(nq);
        auto kernel = [&](const CMat& s) {
            const CMat g = s.transpose() * phase;  // g(j, d)
            const CMat gh = half * g;              // g(j + 1/2, d)
            CMat out(nq, nq);
            for (int a = 0; a < nq; ++a) {
                for (int b = 0; b < nq; ++b) {
                    const int col = a - b + nq - 1;
                    out(a, b) = (a + b) % 2 == 0 ? g((a + b) / 2, col) : gh((a + b - 1) / 2, col);
                }
            }
            return out;
        };
        work = detail::map_pair(work, ext, static_cast<std::size_t>(2 * m), static_cast<std::size_t>(2 * m + 1), nq, nq, kernel,
                                workers);
        ext[static_cast<std::size_t>(2 * m)] = nq;
    }
    std::vector<int> out_ext;
    std::vector<cplx> vals = detail::permute(work, ext, detail::from_pairs(static_cast<std::size_t>(n)), out_ext);
    std::vector<Axis> axes;
    for (int m = 0; m < n; ++m) axes.push_back(w.axes()[static_cast<std::size_t>(n + m)]);
    for (int m = 0; m < n; ++m) axes.push_back(w.axes()[static_cast<std::size_t>(n + m)]);
    return GridFunction(Representation::density, std::move(axes), std::move(vals));
}

/// Sum of rho(x, x) times the x-cell volume.
inline cplx density_trace(const GridFunction& rho) {
    detail::require(rho, Representation::density, "density_trace");
    const std::size_t n = static_cast<std::size_t>(rho.modes());
    std::vector<int> ext;
    double cell = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
        ext.push_back(rho.axes()[m].count);
        cell *= rho.axes()[m].step;
    }
    std::vector<int> idx(n, 0);
    cplx tr = 0.0;
    do {
        std::vector<int> full(idx);
        full.insert(full.end(), idx.begin(), idx.end());
        tr += rho(full);
    } while (mphot::detail::next_index(idx, ext));
    return tr * cell;
}

// ---------------------------------------------------------------------------
// Wigner -> Q (single mode)
// ---------------------------------------------------------------------------

/// Q(beta) = int <beta|x> rho(x, x') <x'|beta> dx dx' with rho obtained from W.
/// With beta = u + iv, Y = (x + x')/2 and s = x - x', the combined kernel is
/// pi^{-1/2} exp[-(Y - sqrt2 u)^2 - s^2/4 - i sqrt2 v s].
inline GridFunction q_from_wigner(const GridFunction& w, const Axis& re_axis, const Axis& im_axis, int workers = 1) {
    detail::require(w, Representation::wigner, "q_from_wigner");
    if (w.modes() != 1) throw std::invalid_argument("q_from_wigner: single mode only");
    re_axis.validate();
    im_axis.validate();
    const GridFunction rho = density_from_wigner(w, workers);
    const Axis& xa = rho.axes()[0];
    const int nx = xa.count;
    const double h = xa.step;
    const double s2 = std::sqrt(2.0);

    // a(u, d) = sum over a - b = d of rho(a, b) exp[-(Y - sqrt2 u)^2 - s^2/4]
    CMat acc = CMat::Zero(re_axis.count, 2 * nx - 1);
    parallel_for(static_cast<std::size_t>(re_axis.count), workers, [&](std::size_t iu) {
        const double u = re_axis.at(static_cast<int>(iu));
        for (int a = 0; a < nx; ++a) {
            for (int b = 0; b < nx; ++b) {
                const double y = 0.5 * (xa.at(a) + xa.at(b));
                const double s = (a - b) * h;
                const double g = std::exp(-(y - s2 * u) * (y - s2 * u) - 0.25 * s * s);
                acc(static_cast<Eigen::Index>(iu), a - b + nx - 1) += rho.values()[static_cast<std::size_t>(a * nx + b)] * g;
            }
        }
    });
    CMat phase(2 * nx - 1, im_axis.count);
    for (int d = -(nx - 1); d <= nx - 1; ++d)
        for (int iv = 0; iv < im_axis.count; ++iv) phase(d + nx - 1, iv) = std::polar(1.0, -s2 * im_axis.at(iv) * d * h);
    const CMat q = acc * phase * (h * h / std::sqrt(pi));
    std::vector<cplx> vals(static_cast<std::size_t>(re_axis.count) * static_cast<std::size_t>(im_axis.count));
    for (int i = 0; i < re_axis.count; ++i)
        for (int j = 0; j < im_axis.count; ++j) vals[static_cast<std::size_t>(i * im_axis.count + j)] = q(i, j);
    return GridFunction(Representation::qfunc, {re_axis, im_axis}, std::move(vals));
}

// ---------------------------------------------------------------------------
// Q -> Wigner / density (single mode)
// ---------------------------------------------------------------------------

namespace detail {

inline CMat dft_matrix(int n, int sign) {
    CMat f(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) f(a, b) = std::polar(1.0, sign * 2.0 * pi * ((static_cast<long>(a) * b) % n) / n);
    return f;
}

inline double dft_frequency(int k, int n, double step) {
    const int kk = k <= n / 2 ? k : k - n;
    return 2.0 * pi * kk / (n * step);
}

}  // namespace detail

/// Deconvolves Q (on a grid of Re beta, Im beta) back to W. In (p, q) = sqrt2
/// (Im beta, Re beta) coordinates Q is W smoothed by the vacuum Gaussian, so
/// W-hat = e^{|k|^2/4} Q-hat. Frequencies whose gain exceeds 1e8 are dropped.
/// The reconstruction is ill-conditioned: Q must decay to round-off at the edge
/// of its grid, and a result above the Wigner bound 2 raises NumericalHealthError.
inline GridFunction wigner_from_q(const GridFunction& q, int workers = 1) {
    detail::require(q, Representation::qfunc, "wigner_from_q");
    if (q.modes() != 1) throw std::invalid_argument("wigner_from_q: single mode only");
    (void)workers;
    const Axis qa = q.axes()[0].scaled(std::sqrt(2.0));  // q = sqrt2 Re beta
    const Axis pa = q.axes()[1].scaled(std::sqrt(2.0));  // p = sqrt2 Im beta
    const int nq = qa.count;
    const int np = pa.count;
    CMat grid(nq, np);
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < np; ++j) grid(i, j) = q.values()[static_cast<std::size_t>(i * np + j)];

    const CMat fq = detail::dft_matrix(nq, -1);
    const CMat fp = detail::dft_matrix(np, -1);
    CMat spec = fq * grid * fp.transpose();
    const double limit = 4.0 * std::log(kMaxDeconvolutionGain);
    for (int a = 0; a < nq; ++a) {
        const double kq = detail::dft_frequency(a, nq, qa.step);
        for (int b = 0; b < np; ++b) {
            const double kp = detail::dft_frequency(b, np, pa.step);
            const double k2 = kq * kq + kp * kp;
            spec(a, b) = k2 > limit ? cplx{} : spec(a, b) * std::exp(0.25 * k2);
        }
    }
    const CMat back = detail::dft_matrix(nq, 1) * spec * detail::dft_matrix(np, 1).transpose() /
                      (static_cast<double>(nq) * static_cast<double>(np));

    std::vector<cplx> vals(static_cast<std::size_t>(np) * static_cast<std::size_t>(nq));
    double peak = 0.0;
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < nq; ++i) {
            const cplx v = back(i, j);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalHealthError("wigner_from_q: overflow");
            peak = std::max(peak, std::abs(v));
            vals[static_cast<std::size_t>(j * nq + i)] = v;
        }
    }
    if (peak > 2.0 * 1.05) {
        throw NumericalHealthError("wigner_from_q: conditioning failure (|W| reached " + std::to_string(peak) +
                                   "); extend the Q grid or smooth the input");
    }
    return GridFunction(Representation::wigner, {pa, qa}, std::move(vals));
}

inline GridFunction density_from_q(const GridFunction& q, int workers = 1) {
    return density_from_wigner(wigner_from_q(q, workers), workers);
}

/// Single-mode analytic continuation Q(ket, bra_conj); Q(beta) is the value at (beta, beta*).
using QContinuation = std::function<cplx(cplx ket, cplx bra_conj)>;

/// Square grid in the complex plane used for the beta and gamma integrals.
struct KernelGrid {
    double extent = 8.0;
    int points = 49;
};

/// rho(x, x') = pi^{-2} int d^2beta d^2gamma phi(beta, gamma) e^{-(x^2 + x'^2)/2} Q(beta, gamma*)
/// with phi = pi^{-1/2} exp[-|b|^2 - |g|^2 + sqrt2 x b + sqrt2 x' g* - b^2/2 - g*^2/2 + g b*],
/// where Q is evaluated as the continuation with ket gamma and conjugated bra beta*.
inline GridFunction density_from_q(const QContinuation& qc, const Axis& x_axis, const KernelGrid& kg = {}, int workers = 1) {
    x_axis.validate();
    const Axis ka = Axis::symmetric(kg.extent, kg.points);
    const int nk = ka.count;
    const int nb = nk * nk;
    const double w = ka.step * ka.step;
    std::vector<cplx> nodes;
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) nodes.emplace_back(ka.at(i), ka.at(j));

    const double s2 = std::sqrt(2.0);
    const int nx = x_axis.count;
    CMat k1(nx, nb);  // exp(-|b|^2 + sqrt2 x b - b^2/2)
    CMat k2(nb, nx);  // exp(-|g|^2 + sqrt2 x' g* - g*^2/2)
    for (int a = 0; a < nx; ++a) {
        const double x = x_axis.at(a);
        for (int t = 0; t < nb; ++t) {
            const cplx b = nodes[static_cast<std::size_t>(t)];
            k1(a, t) = std::exp(-std::norm(b) + s2 * x * b - 0.5 * b * b);
            k2(t, a) = std::exp(-std::norm(b) + s2 * x * std::conj(b) - 0.5 * std::conj(b) * std::conj(b));
        }
    }
    CMat mid(nb, nb);
    parallel_for(static_cast<std::size_t>(nb), workers, [&](std::size_t tb) {
        const cplx b = nodes[tb];
        for (int tg = 0; tg < nb; ++tg) {
            const cplx g = nodes[static_cast<std::size_t>(tg)];
            mid(static_cast<Eigen::Index>(tb), tg) = std::exp(g * std::conj(b)) * qc(g, std::conj(b));
        }
    });
    const CMat rho = k1 * mid * k2 * (w * w * std::pow(pi, -2.5));
    std::vector<cplx> vals(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nx));
    for (int a = 0; a < nx; ++a) {
        const double xa = x_axis.at(a);
        for (int b = 0; b < nx; ++b) {
            const double xb = x_axis.at(b);
            vals[static_cast<std::size_t>(a * nx + b)] = rho(a, b) * std::exp(-0.5 * (xa * xa + xb * xb));
        }
    }
    for (const auto& v : vals) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalHealthError("density_from_q: overflow");
    }
    return GridFunction(Representation::density, {x_axis, x_axis}, std::move(vals));
}

/// W from an analytic Q through the density kernel followed by the coordinate transform.
inline GridFunction wigner_from_q(const QContinuation& qc, const Axis& x_axis, const Axis& p_axis, const KernelGrid& kg = {},
                                  int workers = 1) {
    return wigner_from_density(density_from_q(qc, x_axis, kg, workers), p_axis, workers);
}

// ---------------------------------------------------------------------------
// Replacement evolution
// ---------------------------------------------------------------------------

namespace detail {

// Keys cubic convolution weights (a = -1/2) for fractional offset t in [0, 1).
inline std::array<double, 4> cubic_weights(double t) {
    const double a = -0.5;
    auto w = [a](double x) {
        x = std::abs(x);
        if (x < 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
        if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
        return 0.0;
    };
    return {w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)};
}

/// Tensor cubic interpolation; zero outside the grid box.
inline cplx interpolate(const GridFunction& g, const std::vector<double>& pt) {
    const std::size_t d = pt.size();
    std::vector<int> base(d);
    std::vector<std::array<double, 4>> wts(d);
    for (std::size_t k = 0; k < d; ++k) {
        const Axis& a = g.axes()[k];
        const double f = (pt[k] - a.start) / a.step;
        if (f < -1e-9 || f > a.count - 1 + 1e-9) return 0.0;
        int i = static_cast<int>(std::floor(f));
        i = std::clamp(i, 0, a.count - 2);
        base[k] = i;
        wts[k] = cubic_weights(f - i);
    }
    std::vector<int> off(d, 0);
    const std::vector<int> four(d, 4);
    cplx acc = 0.0;
    std::vector<int> idx(d);
    do {
        double wt = 1.0;
        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
            idx[k] = base[k] - 1 + off[k];
            if (idx[k] < 0 || idx[k] >= g.axes()[k].count) {
                inside = false;
                break;
            }
            wt *= wts[k][static_cast<std::size_t>(off[k])];
        }
        if (inside && wt != 0.0) acc += wt * g(idx);
    } while (mphot::detail::next_index(off, four));
    return acc;
}

inline bool inside_box(const GridFunction& g, const std::vector<double>& pt) {
    for (std::size_t k = 0; k < pt.size(); ++k) {
        const Axis& a = g.axes()[k];
        if (pt[k] < a.start - 1e-9 * a.step || pt[k] > a.last() + 1e-9 * a.step) return false;
    }
    return true;
}

}  // namespace detail

/// W_out(Q) = W_in(S Q + shift), with Q = (p, q). Input weight whose image
/// under the inverse map falls outside the grid is lost; more than 1e-6 of
/// int |W| lost raises NumericalHealthError.
inline GridFunction evolve_wigner(const GridFunction& w, const LinearSymplecticMap& map, int workers = 1) {
    detail::require(w, Representation::wigner, "evolve_wigner");
    if (map.modes() != w.modes()) throw std::invalid_argument("evolve_wigner: map and grid mode counts differ");
    const LinearSymplecticMap inv = map.inverse();
    double total = 0.0;
    double lost = 0.0;
    for (std::size_t f = 0; f < w.size(); ++f) {
        const double mag = std::abs(w.values()[f]);
        total += mag;
        if (mag == 0.0) continue;
        const auto c = w.coords(f);
        const Vec img = inv.apply(Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
        if (!detail::inside_box(w, std::vector<double>(img.data(), img.data() + img.size()))) lost += mag;
    }
    if (total > 0.0 && lost / total > kTailMassLimit) {
        throw NumericalHealthError("evolve_wigner: mapped weight leaves the grid (lost fraction " + std::to_string(lost / total) + ")");
    }
    return GridFunction::sample(
        Representation::wigner, w.axes(),
        [&](const std::vector<double>& c) {
            const Vec src = map.apply(Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
            return detail::interpolate(w, std::vector<double>(src.data(), src.data() + src.size()));
        },
        workers);
}

/// Linear invariant on the coherent amplitude: beta_0 = u beta + v beta* + shift.
struct ComplexLinearInvariant {
    CMat u;
    CMat v;
    CVec shift;

    static ComplexLinearInvariant identity(int n) {
        return {CMat::Identity(n, n), CMat::Zero(n, n), CVec::Zero(n)};
    }

    /// beta_0 = e^{i theta} beta (single mode).
    static ComplexLinearInvariant phase_rotation(double theta) {
        return {CMat::Constant(1, 1, std::polar(1.0, theta)), CMat::Zero(1, 1), CVec::Zero(1)};
    }

    /// Induced by (p0, q0) = S (p, q) + shift with beta = (q + ip)/sqrt2:
    /// u = [S_pp - i S_qp + S_qq + i S_pq]/2,  v = [-S_pp + i S_qp + S_qq + i S_pq]/2.
    static ComplexLinearInvariant from_symplectic(const LinearSymplecticMap& m) {
        const int n = m.modes();
        const cplx i(0.0, 1.0);
        const CMat spp = m.s.topLeftCorner(n, n).cast<cplx>();
        const CMat spq = m.s.topRightCorner(n, n).cast<cplx>();
        const CMat sqp = m.s.bottomLeftCorner(n, n).cast<cplx>();
        const CMat sqq = m.s.bottomRightCorner(n, n).cast<cplx>();
        ComplexLinearInvariant out;
        out.u = 0.5 * (spp - i * sqp + sqq + i * spq);
        out.v = 0.5 * (-spp + i * sqp + sqq + i * spq);
        out.shift = (m.shift.tail(n).cast<cplx>() + i * m.shift.head(n).cast<cplx>()) / std::sqrt(2.0);
        return out;
    }

    int modes() const { return static_cast<int>(u.rows()); }

    /// Passive maps (v = 0, u unitary) send coherent states to coherent states,
    /// which is when the replacement rule is exact for Q.
    bool passive(double tol = 1e-9) const {
        return mphot::detail::max_abs(v) <= tol &&
               mphot::detail::max_abs(CMat(u.adjoint() * u - CMat::Identity(u.rows(), u.cols()))) <= tol;
    }
};

/// Q_out(beta) = Q_in(u beta + v beta* + shift) on the same (Re, Im) grid.
/// Only passive invariants are accepted: for squeezing maps the Q-function does
/// not transform by replacement, because the coherent-state kernel itself changes.
inline GridFunction evolve_q(const GridFunction& q, const ComplexLinearInvariant& inv, int workers = 1) {
    detail::require(q, Representation::qfunc, "evolve_q");
    const int n = q.modes();
    if (inv.modes() != n || inv.v.rows() != n || inv.shift.size() != n) {
        throw std::invalid_argument("evolve_q: invariant and grid mode counts differ");
    }
    if (!inv.passive()) {
        throw std::invalid_argument("evolve_q: replacement is exact only for passive (phase-space rotation and displacement) maps");
    }
    // Lost weight: grid points whose preimage leaves the box.
    const CMat uinv = inv.u.adjoint();
    double total = 0.0;
    double lost = 0.0;
    for (std::size_t f = 0; f < q.size(); ++f) {
        const double mag = std::abs(q.values()[f]);
        total += mag;
        if (mag == 0.0) continue;
        const auto c = q.coords(f);
        CVec b0(n);
        for (int k = 0; k < n; ++k) b0(k) = cplx(c[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(n + k)]);
        const CVec pre = uinv * (b0 - inv.shift);
        std::vector<double> pt(2 * static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            pt[static_cast<std::size_t>(k)] = pre(k).real();
            pt[static_cast<std::size_t>(n + k)] = pre(k).imag();
        }
        if (!detail::inside_box(q, pt)) lost += mag;
    }
    if (total > 0.0 && lost / total > kTailMassLimit) {
        throw NumericalHealthError("evolve_q: mapped weight leaves the grid (lost fraction " + std::to_string(lost / total) + ")");
    }
    return GridFunction::sample(
        Representation::qfunc, q.axes(),
        [&](const std::vector<double>& c) {
            CVec b(n);
            for (int k = 0; k < n; ++k) b(k) = cplx(c[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(n + k)]);
            const CVec b0 = inv.u * b + inv.v * b.conjugate() + inv.shift;
            std::vector<double> pt(2 * static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                pt[static_cast<std::size_t>(k)] = b0(k).real();
                pt[static_cast<std::size_t>(n + k)] = b0(k).imag();
            }
            return detail::interpolate(q, pt);
        },
        workers);
}

}  // namespace mphot::ps
