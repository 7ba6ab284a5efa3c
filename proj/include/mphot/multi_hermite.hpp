#pragma once

// Multivariable Hermite polynomials H_n^{R}(y), defined by the generating function
//
//     exp(-1/2 a.R.a + a.z) = sum_n a^n / n! H_n^{R}(y),      z = R y,
//
// and the Gaussian overlap integral of two such families. R = 2 (one slot)
// reproduces the physicists' Hermite polynomials H_n(y).

#include <cstddef>
#include <utility>
#include <vector>

#include "mphot/common.hpp"

namespace mphot {

inline constexpr int kDefaultHermiteCap = 64;
inline constexpr double kSymmetryTolerance = 1e-12;

/// A Hermite family: complex symmetric R and the linear coefficient z = R.y.
///
/// z is stored rather than y because the recurrence only needs (R, z), and z
/// stays finite in limits where y does not (coherent states).
class HermiteSpec {
public:
    HermiteSpec(CMat r, CVec z) : r_(std::move(r)), z_(std::move(z)) {
        if (r_.rows() != r_.cols()) throw std::invalid_argument("HermiteSpec: R must be square");
        if (z_.size() != r_.rows()) throw std::invalid_argument("HermiteSpec: z dimension mismatch");
        if (detail::symmetry_defect(r_) > kSymmetryTolerance) {
            throw std::invalid_argument("HermiteSpec: R is not symmetric");
        }
    }

    static HermiteSpec from_argument(const CMat& r, const CVec& y) {
        if (y.size() != r.cols()) throw std::invalid_argument("HermiteSpec: y dimension mismatch");
        return HermiteSpec(r, r * y);
    }

    /// The classical family in one variable: R = [2], z = [2y].
    static HermiteSpec classical(cplx y) {
        CMat r(1, 1);
        r(0, 0) = 2.0;
        CVec z(1);
        z(0) = 2.0 * y;
        return HermiteSpec(std::move(r), std::move(z));
    }

    std::size_t dim() const { return static_cast<std::size_t>(r_.rows()); }
    const CMat& r() const { return r_; }
    const CVec& z() const { return z_; }

private:
    CMat r_;
    CVec z_;
};

/// Dense table of H_n for every n <= n_max componentwise, in row-major order.
class HermiteTable {
public:
    HermiteTable(const HermiteSpec& spec, const MultiIndex& n_max, int cap = kDefaultHermiteCap)
        : n_max_(n_max) {
        if (n_max.size() != spec.dim()) throw std::invalid_argument("hermite_table: dimension mismatch");
        for (int e : n_max.entries()) {
            if (e > cap) throw std::invalid_argument("hermite_table: index exceeds the per-slot cap");
        }
        extents_.reserve(n_max.size());
        for (int e : n_max.entries()) extents_.push_back(e + 1);
        strides_ = detail::strides_for(extents_);
        values_.assign(detail::box_volume(extents_), cplx{});
        fill(spec);
    }

    const MultiIndex& n_max() const { return n_max_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<cplx>& values() const { return values_; }

    bool contains(const MultiIndex& n) const {
        if (n.size() != extents_.size()) return false;
        for (std::size_t k = 0; k < n.size(); ++k) {
            if (n[k] >= extents_[k]) return false;
        }
        return true;
    }

    cplx operator()(const MultiIndex& n) const {
        if (!contains(n)) throw std::out_of_range("hermite_table: index outside the table");
        return values_[offset(n.entries())];
    }

    cplx at(std::span<const int> n) const { return values_[offset(n)]; }

private:
    std::size_t offset(std::span<const int> n) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < n.size(); ++k) off += static_cast<std::size_t>(n[k]) * strides_[k];
        return off;
    }

    // H_{m+e_i} = z_i H_m - sum_j R_ij m_j H_{m-e_j}, with i the lowest occupied
    // slot of the target index. Row-major order visits every predecessor first.
    void fill(const HermiteSpec& spec) {
        const std::size_t d = extents_.size();
        const CMat& r = spec.r();
        const CVec& z = spec.z();
        values_[0] = 1.0;
        if (d == 0) return;
        std::vector<int> n(d, 0);
        std::size_t flat = 0;
        while (detail::next_index(n, extents_)) {
            ++flat;
            std::size_t i = 0;
            while (n[i] == 0) ++i;
            const std::size_t m_off = flat - strides_[i];
            cplx h = z(static_cast<Eigen::Index>(i)) * values_[m_off];
            for (std::size_t j = 0; j < d; ++j) {
                const int mj = n[j] - (j == i ? 1 : 0);
                if (mj > 0) {
                    h -= r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * static_cast<double>(mj) *
                         values_[m_off - strides_[j]];
                }
            }
            values_[flat] = h;
        }
    }

    MultiIndex n_max_;
    std::vector<int> extents_;
    std::vector<std::size_t> strides_;
    std::vector<cplx> values_;
};

inline HermiteTable hermite_table(const HermiteSpec& spec, const MultiIndex& n_max, int cap = kDefaultHermiteCap) {
    return HermiteTable(spec, n_max, cap);
}

/// H_n^{R}(y) through the recurrence; bitwise identical to the matching table entry.
inline cplx hermite_eval(const HermiteSpec& spec, const MultiIndex& n, int cap = kDefaultHermiteCap) {
    if (n.size() != spec.dim()) throw std::invalid_argument("hermite_eval: dimension mismatch");
    HermiteTable t(spec, n, cap);
    return t.values().back();
}

/// Physicists' Hermite values H_0(x) ... H_n(x).
inline std::vector<double> classical_hermite_values(int n, double x) {
    HermiteTable t(HermiteSpec::classical(x), MultiIndex{n}, std::max(n, kDefaultHermiteCap));
    std::vector<double> out;
    out.reserve(t.size());
    for (const cplx& v : t.values()) out.push_back(v.real());
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian overlap of two Hermite families
// ---------------------------------------------------------------------------

/// Parameters of  int H_n^{R}(x) H_m^{r}(L x + d) exp(-x.m.x + c.x) dx.
struct OverlapSpec {
    CMat big_r;   ///< R (N x N, symmetric), family of the n-polynomial
    CMat small_r; ///< r (N x N, symmetric), family of the m-polynomial
    CMat lambda;  ///< linear map of the second argument
    CMat m;       ///< Gaussian width matrix, symmetric, Re(m) positive definite
    CVec c;
    CVec d;

    std::size_t modes() const { return static_cast<std::size_t>(m.rows()); }

    void validate() const {
        const auto n = m.rows();
        auto square_n = [n](const CMat& a) { return a.rows() == n && a.cols() == n; };
        if (!square_n(big_r) || !square_n(small_r) || !square_n(lambda) || !square_n(m)) {
            throw std::invalid_argument("OverlapSpec: matrix dimensions must agree");
        }
        if (c.size() != n || d.size() != n) throw std::invalid_argument("OverlapSpec: vector dimensions must agree");
        if (detail::symmetry_defect(big_r) > kSymmetryTolerance || detail::symmetry_defect(small_r) > kSymmetryTolerance ||
            detail::symmetry_defect(m) > kSymmetryTolerance) {
            throw std::invalid_argument("OverlapSpec: R, r and m must be symmetric");
        }
        Eigen::LLT<Mat> llt(m.real());
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("OverlapSpec: Re(m) must be positive definite");
        }
    }
};

/// Result of the overlap: prefactor * H_{(n,m)}^{rho}(y), with z = rho.y.
struct OverlapResult {
    CMat rho;  ///< [[R1, R12], [R12^t, R2]]; the first block pairs with n
    CVec z;
    CVec y;
    cplx prefactor;

    std::size_t modes() const { return static_cast<std::size_t>(rho.rows() / 2); }
    HermiteSpec spec() const { return HermiteSpec(rho, z); }

    CMat r1() const { return rho.topLeftCorner(rho.rows() / 2, rho.cols() / 2); }
    CMat r2() const { return rho.bottomRightCorner(rho.rows() / 2, rho.cols() / 2); }
    CMat r12() const { return rho.topRightCorner(rho.rows() / 2, rho.cols() / 2); }

    /// Value of the integral for indices n (first family) and m (second family).
    cplx value(const MultiIndex& n, const MultiIndex& m) const {
        if (n.size() != modes() || m.size() != modes()) throw std::invalid_argument("overlap value: dimension mismatch");
        return prefactor * hermite_eval(spec(), n.concat(m));
    }
};

namespace detail {

// det(m)^{-1/2} on the branch continuous from real positive definite m: every
// eigenvalue has positive real part when Re(m) > 0, so principal roots multiply.
inline cplx inverse_sqrt_det(const CMat& m) {
    Eigen::ComplexEigenSolver<CMat> es(m, false);
    cplx acc = 1.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) acc /= std::sqrt(es.eigenvalues()(k));
    return acc;
}

inline OverlapResult assemble_overlap(const CMat& r1, const CMat& r2, const CMat& r12, const CVec& z1, const CVec& z2,
                                      const CMat& m, const CMat& m_inv, const CVec& c) {
    const auto n = m.rows();
    OverlapResult out;
    out.rho.resize(2 * n, 2 * n);
    out.rho.topLeftCorner(n, n) = r1;
    out.rho.bottomRightCorner(n, n) = r2;
    out.rho.topRightCorner(n, n) = r12;
    out.rho.bottomLeftCorner(n, n) = r12.transpose();
    out.rho = 0.5 * (out.rho + out.rho.transpose()).eval();
    out.z.resize(2 * n);
    out.z << z1, z2;

    Eigen::FullPivLU<CMat> lu(out.rho);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) throw SingularMatrixError("hermite_overlap: degenerate overlap (rho is singular)");
    out.y = lu.solve(out.z);

    const cplx quad = (c.transpose() * m_inv * c)(0, 0);
    out.prefactor = std::pow(pi, 0.5 * static_cast<double>(n)) * inverse_sqrt_det(m) * std::exp(0.25 * quad);
    return out;
}

}  // namespace detail

/// Overlap of two generic Hermite families with a Gaussian.
///
///   R1  = R - 1/2 R m^-1 R
///   R2  = r - 1/2 r L m^-1 L^t r
///   R12 = -1/2 R m^-1 L^t r
///   z   = (1/2 R m^-1 c,  r d + 1/2 r L m^-1 c)
inline OverlapResult hermite_overlap(const OverlapSpec& s) {
    s.validate();
    const CMat mi = detail::checked_inverse(s.m, "overlap width matrix m");
    const CMat r1 = s.big_r - 0.5 * s.big_r * mi * s.big_r;
    const CMat r2 = s.small_r - 0.5 * s.small_r * s.lambda * mi * s.lambda.transpose() * s.small_r;
    const CMat r12 = -0.5 * s.big_r * mi * s.lambda.transpose() * s.small_r;
    const CVec z1 = 0.5 * s.big_r * mi * s.c;
    const CVec z2 = s.small_r * s.d + 0.5 * s.small_r * s.lambda * mi * s.c;
    return detail::assemble_overlap(r1, r2, r12, z1, z2, s.m, mi, s.c);
}

/// Fast path for R = r = 2I: products of classical Hermite polynomials.
inline OverlapResult hermite_overlap_classical(const CMat& lambda, const CMat& m, const CVec& c, const CVec& d) {
    const auto n = m.rows();
    const CMat two = 2.0 * CMat::Identity(n, n);
    OverlapSpec s{two, two, lambda, m, c, d};
    s.validate();
    const CMat mi = detail::checked_inverse(m, "overlap width matrix m");
    const CMat id = CMat::Identity(n, n);
    const CMat r1 = 2.0 * (id - mi);
    const CMat r2 = 2.0 * (id - lambda * mi * lambda.transpose());
    const CMat r12 = -2.0 * mi * lambda.transpose();
    const CVec z1 = mi * c;
    const CVec z2 = lambda * mi * c + 2.0 * d;
    return detail::assemble_overlap(r1, r2, r12, z1, z2, m, mi, c);
}

// ---------------------------------------------------------------------------
// Block factorization
// ---------------------------------------------------------------------------

/// Split a spec whose R is block diagonal at slot `split` into the two factors,
/// so that H_{(k1,k2)}^{R} = H_{k1}^{R1} H_{k2}^{R2}.
inline std::pair<HermiteSpec, HermiteSpec> block_factorize(const HermiteSpec& spec, std::size_t split) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const auto s = static_cast<Eigen::Index>(split);
    if (s <= 0 || s >= d) throw std::invalid_argument("block_factorize: split must lie strictly inside the dimension");
    const CMat& r = spec.r();
    const double scale = std::max(1.0, detail::max_abs(r));
    if (detail::max_abs(CMat(r.topRightCorner(s, d - s))) > kSymmetryTolerance * scale) {
        throw std::invalid_argument("block_factorize: R is not block diagonal");
    }
    return {HermiteSpec(r.topLeftCorner(s, s), spec.z().head(s)),
            HermiteSpec(r.bottomRightCorner(d - s, d - s), spec.z().tail(d - s))};
}

/// True when the second factor is the complex conjugate of the first, in which
/// case H_{(k,k)} = |H_k|^2.
inline bool is_conjugate_pair(const HermiteSpec& a, const HermiteSpec& b, double tol = kSymmetryTolerance) {
    if (a.dim() != b.dim()) return false;
    const double scale = std::max({1.0, detail::max_abs(a.r()), a.z().size() ? a.z().cwiseAbs().maxCoeff() : 0.0});
    return detail::max_abs(CMat(a.r().conjugate() - b.r())) <= tol * scale &&
           (a.z().conjugate() - b.z()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Product evaluation through the two factors of a block-diagonal spec.
inline cplx factorized_eval(const std::pair<HermiteSpec, HermiteSpec>& parts, const MultiIndex& k) {
    const std::size_t s = parts.first.dim();
    if (k.size() != s + parts.second.dim()) throw std::invalid_argument("factorized_eval: dimension mismatch");
    std::vector<int> k1(k.entries().begin(), k.entries().begin() + static_cast<std::ptrdiff_t>(s));
    std::vector<int> k2(k.entries().begin() + static_cast<std::ptrdiff_t>(s), k.entries().end());
    return hermite_eval(parts.first, MultiIndex(k1)) * hermite_eval(parts.second, MultiIndex(k2));
}

/// |H_k^{R1}(y1)|^2 for a conjugate-block spec, checked and evaluated once.
inline double conjugate_block_eval(const HermiteSpec& spec, const MultiIndex& k) {
    auto parts = block_factorize(spec, spec.dim() / 2);
    if (!is_conjugate_pair(parts.first, parts.second)) {
        throw std::invalid_argument("conjugate_block_eval: blocks are not complex conjugates");
    }
    std::vector<int> half(k.entries().begin(), k.entries().begin() + static_cast<std::ptrdiff_t>(spec.dim() / 2));
    std::vector<int> other(k.entries().begin() + static_cast<std::ptrdiff_t>(spec.dim() / 2), k.entries().end());
    if (half != other) throw std::invalid_argument("conjugate_block_eval: index must be of the form (k, k)");
    return std::norm(hermite_eval(parts.first, MultiIndex(half)));
}

}  // namespace mphot
