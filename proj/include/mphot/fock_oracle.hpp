#pragma once

// Truncated Fock-space reference states built by direct summation (coherent,
// cat, thermal) or by exponentiating the squeezing and displacement
// generators on a padded number basis. Nothing here goes through the
// multivariable Hermite engine; position wave functions use only the
// classical three-term Hermite recurrence.

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "mphot/common.hpp"
#include "mphot/multi_hermite.hpp"

namespace mphot::fock {

inline constexpr double kCoherentTailLimit = 1e-12;

/// Amplitudes over number states |n_1 .. n_N>, every n_j in [0, cutoff],
/// row-major with mode 0 slowest.
struct FockVector {
    int modes = 1;
    int cutoff = 0;
    std::vector<cplx> amp;
    double tail_mass = 0.0;  ///< probability weight that fell outside the cutoff

    FockVector() = default;
    FockVector(int modes_in, int cutoff_in) : modes(modes_in), cutoff(cutoff_in) {
        if (modes < 1 || cutoff < 0) throw std::invalid_argument("FockVector: bad shape");
        amp.assign(mphot::detail::box_volume(extents()), cplx{});
    }

    std::vector<int> extents() const { return std::vector<int>(static_cast<std::size_t>(modes), cutoff + 1); }

    std::size_t offset(const std::vector<int>& n) const {
        std::size_t off = 0;
        for (int k : n) off = off * static_cast<std::size_t>(cutoff + 1) + static_cast<std::size_t>(k);
        return off;
    }
    cplx at(const std::vector<int>& n) const { return amp.at(offset(n)); }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amp) s += std::norm(a);
        return s;
    }
};

namespace detail {

/// Poisson weight beyond the cutoff, summed term by term.
inline double poisson_tail(double mean, int cutoff) {
    if (mean == 0.0) return 0.0;
    double tail = 0.0;
    for (int n = cutoff + 1; n < cutoff + 2000; ++n) {
        const double term = std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
        tail += term;
        if (n > mean && term < 1e-30) break;
    }
    return tail;
}

inline std::vector<cplx> coherent_amplitudes(cplx alpha, int cutoff) {
    std::vector<cplx> a(static_cast<std::size_t>(cutoff) + 1);
    a[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= cutoff; ++n) a[static_cast<std::size_t>(n)] = a[static_cast<std::size_t>(n) - 1] * alpha / std::sqrt(double(n));
    return a;
}

inline FockVector product_state(const std::vector<std::vector<cplx>>& factors, int cutoff) {
    FockVector v(static_cast<int>(factors.size()), cutoff);
    std::vector<int> n(factors.size(), 0);
    const auto ext = v.extents();
    std::size_t off = 0;
    do {
        cplx a = 1.0;
        for (std::size_t j = 0; j < n.size(); ++j) a *= factors[j][static_cast<std::size_t>(n[j])];
        v.amp[off++] = a;
    } while (mphot::detail::next_index(n, ext));
    return v;
}

/// Apply a single-mode matrix (size (cutoff+1)^2) to one mode of a FockVector.
inline FockVector apply_mode_matrix(const FockVector& v, int mode, const CMat& op) {
    FockVector out(v.modes, v.cutoff);
    const int d = v.cutoff + 1;
    const auto strides = mphot::detail::strides_for(v.extents());
    const std::size_t stride = strides[static_cast<std::size_t>(mode)];
    for (std::size_t base = 0; base < v.amp.size(); ++base) {
        if ((base / stride) % static_cast<std::size_t>(d) != 0) continue;
        for (int r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < d; ++c) acc += op(r, c) * v.amp[base + static_cast<std::size_t>(c) * stride];
            out.amp[base + static_cast<std::size_t>(r) * stride] = acc;
        }
    }
    return out;
}

inline cplx inner(const FockVector& a, const FockVector& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s;
}

inline CMat lowering(int dim) {
    CMat a = CMat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

/// Copy into a larger cutoff, zero-filled.
inline FockVector padded(const FockVector& v, int cutoff) {
    FockVector out(v.modes, cutoff);
    std::vector<int> n(static_cast<std::size_t>(v.modes), 0);
    const auto ext = v.extents();
    std::size_t off = 0;
    do {
        out.amp[out.offset(n)] = v.amp[off++];
    } while (mphot::detail::next_index(n, ext));
    out.tail_mass = v.tail_mass;
    return out;
}

}  // namespace detail

/// e^{-|alpha|^2/2} alpha^n / sqrt(n!) per mode; refuses cutoffs that leave tail mass >= 1e-12.
inline FockVector coherent_vector(const CVec& alpha, int cutoff) {
    if (alpha.size() < 1) throw std::invalid_argument("coherent_vector: need at least one mode");
    std::vector<std::vector<cplx>> factors;
    double keep = 1.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
        factors.push_back(detail::coherent_amplitudes(alpha(j), cutoff));
        keep *= 1.0 - detail::poisson_tail(std::norm(alpha(j)), cutoff);
    }
    const double tail = 1.0 - keep;
    if (tail >= kCoherentTailLimit) {
        throw std::invalid_argument("coherent_vector: cutoff leaves tail mass " + std::to_string(tail));
    }
    FockVector v = detail::product_state(factors, cutoff);
    v.tail_mass = tail;
    return v;
}

inline FockVector coherent_vector(cplx alpha, int cutoff) { return coherent_vector(CVec::Constant(1, alpha), cutoff); }

/// (|A> +- |-A>) / sqrt(2 +- 2 e^{-2|A|^2}).
inline FockVector cat_vector(const CVec& alpha, bool even, int cutoff) {
    const double x = alpha.squaredNorm();
    if (!even && x == 0.0) throw std::invalid_argument("cat_vector: odd state needs A != 0");
    FockVector v = coherent_vector(alpha, cutoff);
    const double overlap = std::exp(-2.0 * x);
    const double norm = even ? std::sqrt(2.0 + 2.0 * overlap) : std::sqrt(-2.0 * std::expm1(-2.0 * x));
    std::vector<int> n(static_cast<std::size_t>(v.modes), 0);
    const auto ext = v.extents();
    std::size_t off = 0;
    do {
        int total = 0;
        for (int k : n) total += k;
        const double flip = (total % 2 == 0) ? 1.0 : -1.0;
        v.amp[off] = (v.amp[off] + (even ? 1.0 : -1.0) * flip * v.amp[off]) / norm;
        ++off;
    } while (mphot::detail::next_index(n, ext));
    v.tail_mass = std::max(0.0, 1.0 - v.norm_sq());
    return v;
}

/// D(alpha) S(r)|0> with S(r) = exp[r/2 (a^2 - a^dag^2)], built by matrix
/// exponentials on a padded basis and then cut to `cutoff`.
/// S(r) squeezes q: Var(q) = e^{-2r}/2, Var(p) = e^{2r}/2.
inline FockVector squeezed_vector(double r, cplx alpha, int cutoff) {
    const double mean_n = std::sinh(r) * std::sinh(r) + std::norm(alpha);
    if (cutoff < 8.0 * (mean_n + 1.0)) {
        throw std::invalid_argument("squeezed_vector: cutoff must be at least 8(<n> + 1)");
    }
    const int work = 2 * cutoff + 40;
    const CMat a = detail::lowering(work);
    const CMat ad = a.adjoint();
    const CMat gen_s = 0.5 * r * (a * a - ad * ad);
    const CMat gen_d = alpha * ad - std::conj(alpha) * a;
    CVec psi = CVec::Zero(work);
    psi(0) = 1.0;
    psi = gen_s.exp() * psi;
    psi = gen_d.exp() * psi;
    FockVector v(1, cutoff);
    double kept = 0.0;
    for (int n = 0; n <= cutoff; ++n) {
        v.amp[static_cast<std::size_t>(n)] = psi(n);
        kept += std::norm(psi(n));
    }
    const double total = psi.squaredNorm();
    if (std::abs(total - 1.0) > 1e-8) throw NumericalHealthError("squeezed_vector: truncation failure");
    v.tail_mass = std::max(0.0, total - kept);
    return v;
}

/// a_mode applied to v (exact on the truncated space).
inline FockVector apply_annihilation(const FockVector& v, int mode) {
    if (mode < 0 || mode >= v.modes) throw std::out_of_range("apply_annihilation: mode out of range");
    FockVector out = detail::apply_mode_matrix(v, mode, detail::lowering(v.cutoff + 1));
    out.tail_mass = v.tail_mass;
    return out;
}

/// |amplitude|^2 in the same row-major order as the amplitudes.
inline std::vector<double> distribution(const FockVector& v) {
    std::vector<double> p(v.amp.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(v.amp[i]);
    return p;
}

struct Moments {
    Vec mean_n;    ///< <n_j>
    Mat cov_n;     ///< Cov(n_i, n_k)
    Vec mean_quad; ///< (<p_1>..<p_N>, <q_1>..<q_N>)
    Mat cov_quad;  ///< symmetrized quadrature covariance, same ordering
};

inline Moments moments(const FockVector& v) {
    const int n = v.modes;
    Moments m;
    m.mean_n = Vec::Zero(n);
    Mat nn = Mat::Zero(n, n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const auto ext = v.extents();
    std::size_t off = 0;
    double total = 0.0;
    do {
        const double w = std::norm(v.amp[off++]);
        total += w;
        for (int i = 0; i < n; ++i) {
            m.mean_n(i) += w * idx[static_cast<std::size_t>(i)];
            for (int k = 0; k < n; ++k) nn(i, k) += w * idx[static_cast<std::size_t>(i)] * idx[static_cast<std::size_t>(k)];
        }
    } while (mphot::detail::next_index(idx, ext));
    m.mean_n /= total;
    nn /= total;
    m.cov_n = nn - m.mean_n * m.mean_n.transpose();

    // Quadrature operators on a basis one level larger, so a^dag acts exactly.
    const FockVector w = detail::padded(v, v.cutoff + 1);
    const int d = w.cutoff + 1;
    const CMat a = detail::lowering(d);
    const CMat qop = (a + a.adjoint()) / std::sqrt(2.0);
    const CMat pop = (a - a.adjoint()) / cplx(0.0, std::sqrt(2.0));
    std::vector<FockVector> applied;  // p_1..p_N, q_1..q_N applied to w
    for (int j = 0; j < n; ++j) applied.push_back(detail::apply_mode_matrix(w, j, pop));
    for (int j = 0; j < n; ++j) applied.push_back(detail::apply_mode_matrix(w, j, qop));
    m.mean_quad = Vec(2 * n);
    for (int s = 0; s < 2 * n; ++s) m.mean_quad(s) = detail::inner(w, applied[static_cast<std::size_t>(s)]).real() / total;
    m.cov_quad = Mat(2 * n, 2 * n);
    for (int s = 0; s < 2 * n; ++s) {
        for (int t = 0; t < 2 * n; ++t) {
            const double sym = detail::inner(applied[static_cast<std::size_t>(s)], applied[static_cast<std::size_t>(t)]).real() / total;
            m.cov_quad(s, t) = sym - m.mean_quad(s) * m.mean_quad(t);
        }
    }
    return m;
}

/// |<beta|psi>|^2 with the coherent bra summed term by term.
inline double q_overlap(const FockVector& v, const CVec& beta) {
    if (beta.size() != v.modes) throw std::invalid_argument("q_overlap: beta must have one entry per mode");
    std::vector<std::vector<cplx>> factors;
    for (Eigen::Index j = 0; j < beta.size(); ++j) factors.push_back(detail::coherent_amplitudes(beta(j), v.cutoff));
    const FockVector b = detail::product_state(factors, v.cutoff);
    return std::norm(detail::inner(b, v));
}

/// Single-mode thermal state, diagonal in the number basis.
struct DensityMatrix {
    int cutoff = 0;
    CMat rho;
    double tail_mass = 0.0;
};

inline DensityMatrix thermal_density(double nbar, int cutoff) {
    if (nbar < 0.0) throw std::invalid_argument("thermal_density: nbar must be non-negative");
    DensityMatrix d;
    d.cutoff = cutoff;
    d.rho = CMat::Zero(cutoff + 1, cutoff + 1);
    const double ratio = nbar / (1.0 + nbar);
    double kept = 0.0;
    for (int n = 0; n <= cutoff; ++n) {
        const double p = std::pow(ratio, n) / (1.0 + nbar);
        d.rho(n, n) = p;
        kept += p;
    }
    d.tail_mass = std::max(0.0, 1.0 - kept);
    return d;
}

inline std::vector<double> distribution(const DensityMatrix& d) {
    std::vector<double> p(static_cast<std::size_t>(d.cutoff) + 1);
    for (int n = 0; n <= d.cutoff; ++n) p[static_cast<std::size_t>(n)] = d.rho(n, n).real();
    return p;
}

/// <beta|rho|beta> for a single mode.
inline double q_overlap(const DensityMatrix& d, cplx beta) {
    const auto b = detail::coherent_amplitudes(beta, d.cutoff);
    CVec bv(d.cutoff + 1);
    for (int n = 0; n <= d.cutoff; ++n) bv(n) = b[static_cast<std::size_t>(n)];
    return (bv.adjoint() * d.rho * bv)(0, 0).real();
}

/// psi(x) = sum_n c_n (2^n n! sqrt(pi))^{-1/2} H_n(x) e^{-x^2/2}, single mode.
inline std::vector<cplx> position_wave(const FockVector& v, const std::vector<double>& xs) {
    if (v.modes != 1) throw std::invalid_argument("position_wave: single mode only");
    std::vector<cplx> out;
    out.reserve(xs.size());
    for (double x : xs) {
        const auto h = classical_hermite_values(v.cutoff, x);
        cplx acc = 0.0;
        for (int n = 0; n <= v.cutoff; ++n) {
            const double log_norm = -0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0) + 0.5 * std::log(pi));
            acc += v.amp[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(n)] * std::exp(log_norm - 0.5 * x * x);
        }
        out.push_back(acc);
    }
    return out;
}

}  // namespace mphot::fock
