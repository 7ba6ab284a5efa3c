#pragma once

// Multimode Gaussian states in Wigner form, their photon-number statistics
// through doubled-index Hermite polynomials, and Q-function parameters.
//
// Conventions (fixed globally):
//   * quadratures ordered Q = (p_1..p_N, q_1..q_N), hbar = 1,
//     p = (a - a^dag)/(i sqrt2), q = (a + a^dag)/sqrt2;
//   * a coherent amplitude alpha has <q> = sqrt2 Re(alpha), <p> = sqrt2 Im(alpha);
//   * in (R, z) the first N slots pair with the bra index of <m|rho|n>, so
//     z = (alpha, alpha*) for a coherent state and the Q-function contracts
//     (beta*, beta).

#include <cmath>
#include <utility>
#include <vector>

#include "mphot/common.hpp"
#include "mphot/multi_hermite.hpp"

namespace mphot::gaussian {

inline constexpr double kUncertaintyTolerance = 1e-10;
inline constexpr double kImagResidueRelative = 1e-8;
inline constexpr double kImagResidueAbsolute = 1e-10;

/// Mean quadratures and real symmetric 2N x 2N dispersion matrix.
class GaussianState {
public:
    GaussianState(Vec mean, Mat disp) : mean_(std::move(mean)), disp_(std::move(disp)) {
        if (disp_.rows() != disp_.cols() || disp_.rows() % 2 != 0 || disp_.rows() == 0) {
            throw std::invalid_argument("GaussianState: dispersion matrix must be 2N x 2N");
        }
        if (mean_.size() != disp_.rows()) throw std::invalid_argument("GaussianState: mean must have 2N entries");
        if (mphot::detail::symmetry_defect(disp_) > kSymmetryTolerance) {
            throw std::invalid_argument("GaussianState: dispersion matrix is not symmetric");
        }
    }

    int modes() const { return static_cast<int>(disp_.rows() / 2); }
    const Vec& mean() const { return mean_; }
    const Mat& disp() const { return disp_; }

    static GaussianState vacuum(int modes) {
        return GaussianState(Vec::Zero(2 * modes), 0.5 * Mat::Identity(2 * modes, 2 * modes));
    }

    static GaussianState coherent(const CVec& alpha) {
        const auto n = alpha.size();
        Vec mean(2 * n);
        for (Eigen::Index j = 0; j < n; ++j) {
            mean(j) = std::sqrt(2.0) * alpha(j).imag();
            mean(n + j) = std::sqrt(2.0) * alpha(j).real();
        }
        return GaussianState(mean, 0.5 * Mat::Identity(2 * n, 2 * n));
    }

    static GaussianState thermal(const Vec& nbar) {
        const auto n = nbar.size();
        Vec diag(2 * n);
        diag << (nbar.array() + 0.5).matrix(), (nbar.array() + 0.5).matrix();
        return GaussianState(Vec::Zero(2 * n), diag.asDiagonal());
    }

    /// Single-mode squeezed state: variance e^{-2r}/2 in q, e^{2r}/2 in p, displaced by alpha.
    static GaussianState squeezed(double r, cplx alpha = 0.0) {
        Mat m(2, 2);
        m << 0.5 * std::exp(2 * r), 0.0, 0.0, 0.5 * std::exp(-2 * r);
        Vec mean(2);
        mean << std::sqrt(2.0) * alpha.imag(), std::sqrt(2.0) * alpha.real();
        return GaussianState(mean, m);
    }

private:
    Vec mean_;
    Mat disp_;
};

// ---------------------------------------------------------------------------
// Fixed matrices
// ---------------------------------------------------------------------------

/// U maps (a, a^dag) to (p, q).
inline CMat unitary_u(int n) {
    const CMat id = CMat::Identity(n, n);
    const cplx i(0.0, 1.0);
    CMat u(2 * n, 2 * n);
    u << -i * id, i * id, id, id;
    return u / std::sqrt(2.0);
}

inline CMat sigma_x(int n) {
    CMat s = CMat::Zero(2 * n, 2 * n);
    s.topRightCorner(n, n).setIdentity();
    s.bottomLeftCorner(n, n).setIdentity();
    return s;
}

/// Commutator matrix for (p, q) ordering: [Q_a, Q_b] = i J_ab.
inline Mat commutator_j(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return j;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    double symmetry_defect = 0.0;
    double min_eigenvalue = 0.0;  ///< of the Hermitian matrix M + (i/2) J
    bool accepted = false;
};

inline ValidationReport validate(const GaussianState& s) {
    ValidationReport rep;
    rep.symmetry_defect = mphot::detail::symmetry_defect(s.disp());
    const cplx i(0.0, 1.0);
    const CMat h = s.disp().cast<cplx>() + 0.5 * i * commutator_j(s.modes()).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    rep.accepted = rep.symmetry_defect <= kSymmetryTolerance && rep.min_eigenvalue >= -kUncertaintyTolerance;
    return rep;
}

inline void require_valid(const GaussianState& s) {
    const auto rep = validate(s);
    if (!rep.accepted) {
        throw NumericalHealthError("Gaussian state violates the uncertainty relation (min eigenvalue " +
                                   std::to_string(rep.min_eigenvalue) + ")");
    }
}

// ---------------------------------------------------------------------------
// Q-function parameters
// ---------------------------------------------------------------------------

/// Q(beta) = p0 exp[-1/2 B'(R + sigma_x)B' + B'.z],  B' = (beta*, beta).
struct QParams {
    CMat r;
    CVec z;
    double p0 = 1.0;

    QParams(CMat r_in, CVec z_in, double p0_in) : r(std::move(r_in)), z(std::move(z_in)), p0(p0_in) {
        if (r.rows() != r.cols() || r.rows() % 2 != 0 || z.size() != r.rows()) {
            throw std::invalid_argument("QParams: R must be 2N x 2N and z a 2N-vector");
        }
        if (mphot::detail::symmetry_defect(r) > kSymmetryTolerance) throw std::invalid_argument("QParams: R is not symmetric");
        if (!(p0 > 0.0 && p0 <= 1.0 + 1e-12)) throw std::invalid_argument("QParams: p0 must lie in (0, 1]");
    }

    int modes() const { return static_cast<int>(r.rows() / 2); }
    HermiteSpec hermite_spec() const { return HermiteSpec(r, z); }
};

inline QParams q_params(const GaussianState& s) {
    require_valid(s);
    const int n = s.modes();
    const Mat id = Mat::Identity(2 * n, 2 * n);
    const Mat shifted = s.disp() + 0.5 * id;
    Eigen::LDLT<Mat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success || !(shifted.determinant() > 0.0)) {
        throw SingularMatrixError("q_params: M + I/2 is singular");
    }
    const Mat k = mphot::detail::checked_inverse(Mat(id + 2.0 * s.disp()), "I + 2M");
    const CMat u = unitary_u(n);
    // U^dag U* = sigma_x turns 2U^dag K U* - sigma_x into U^dag (I - 2M) K U*,
    // which vanishes exactly at M = I/2 instead of up to rounding.
    const Mat core = (id - 2.0 * s.disp()) * k;
    CMat r = u.adjoint() * core.cast<cplx>() * u.conjugate();
    r = 0.5 * (r + r.transpose()).eval();
    const CVec z = 2.0 * u.adjoint() * (k * s.mean()).cast<cplx>();
    const double quad = s.mean().dot(k * s.mean());
    const double p0 = std::exp(-quad) / std::sqrt(shifted.determinant());
    return QParams(std::move(r), z, std::min(p0, 1.0));
}

/// Hermite argument y = 2 U^t (I - 2M)^-1 <Q>; singular exactly at coherent states.
inline CVec hermite_argument_direct(const GaussianState& s) {
    const int n = s.modes();
    const Mat a = Mat::Identity(2 * n, 2 * n) - 2.0 * s.disp();
    const Mat ainv = mphot::detail::checked_inverse(a, "I - 2M");
    return 2.0 * unitary_u(n).transpose() * (ainv * s.mean()).cast<cplx>();
}

inline double vacuum_probability(const GaussianState& s) { return q_params(s).p0; }

// ---------------------------------------------------------------------------
// Photon statistics
// ---------------------------------------------------------------------------

struct ProbabilityReport {
    double probability = 0.0;
    double imag_residue = 0.0;
    double clipped = 0.0;  ///< magnitude of a negative real part set to zero
};

namespace detail {

inline ProbabilityReport settle_probability(cplx raw) {
    ProbabilityReport rep;
    rep.imag_residue = std::abs(raw.imag());
    if (rep.imag_residue > kImagResidueAbsolute && rep.imag_residue > kImagResidueRelative * std::abs(raw.real())) {
        throw NumericalHealthError("photon probability has an imaginary residue of " +
                                   std::to_string(rep.imag_residue));
    }
    if (raw.real() < 0.0) {
        rep.clipped = -raw.real();
        rep.probability = 0.0;
    } else {
        rep.probability = raw.real();
    }
    return rep;
}

}  // namespace detail

inline ProbabilityReport photon_probability(const QParams& qp, const MultiIndex& n) {
    if (static_cast<int>(n.size()) != qp.modes()) throw std::invalid_argument("photon_distribution: n must have N entries");
    const cplx h = hermite_eval(qp.hermite_spec(), n.doubled());
    return detail::settle_probability(qp.p0 * h / n.factorial());
}

/// P_n = p0 H_{(n,n)}^{R}(y) / n!
inline double photon_distribution(const GaussianState& s, const MultiIndex& n) {
    return photon_probability(q_params(s), n).probability;
}

/// All P_n with every n_j <= n_cap, row-major over (n_1, ..., n_N).
struct DistributionTable {
    int modes = 0;
    int n_cap = 0;
    std::vector<double> probabilities;
    double max_imag_residue = 0.0;
    double max_clipped = 0.0;

    double total() const {
        double t = 0.0;
        for (double p : probabilities) t += p;
        return t;
    }
    double at(const MultiIndex& n) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < n.size(); ++k) off = off * static_cast<std::size_t>(n_cap + 1) + static_cast<std::size_t>(n[k]);
        return probabilities.at(off);
    }
};

inline DistributionTable photon_distribution_table(const QParams& qp, int n_cap, int cap = kDefaultHermiteCap) {
    const int modes = qp.modes();
    const MultiIndex top = MultiIndex(std::vector<int>(static_cast<std::size_t>(modes), n_cap)).doubled();
    const HermiteTable table(qp.hermite_spec(), top, cap);
    DistributionTable out;
    out.modes = modes;
    out.n_cap = n_cap;
    std::vector<int> extents(static_cast<std::size_t>(modes), n_cap + 1);
    std::vector<int> n(static_cast<std::size_t>(modes), 0);
    do {
        const MultiIndex mi(n);
        const auto rep = detail::settle_probability(qp.p0 * table(mi.doubled()) / mi.factorial());
        out.probabilities.push_back(rep.probability);
        out.max_imag_residue = std::max(out.max_imag_residue, rep.imag_residue);
        out.max_clipped = std::max(out.max_clipped, rep.clipped);
    } while (mphot::detail::next_index(n, extents));
    return out;
}

inline DistributionTable photon_distribution_table(const GaussianState& s, int n_cap) {
    return photon_distribution_table(q_params(s), n_cap);
}

/// <n_j> = 1/2(s_pp + s_qq - 1) + 1/2(<p_j>^2 + <q_j>^2), j zero-based.
inline double mean_photon_number(const GaussianState& s, int j) {
    const int n = s.modes();
    if (j < 0 || j >= n) throw std::out_of_range("mean_photon_number: mode index out of range");
    const double spp = s.disp()(j, j);
    const double sqq = s.disp()(n + j, n + j);
    const double mp = s.mean()(j);
    const double mq = s.mean()(n + j);
    return 0.5 * (spp + sqq - 1.0) + 0.5 * (mp * mp + mq * mq);
}

// ---------------------------------------------------------------------------
// Q-function
// ---------------------------------------------------------------------------

/// Analytic continuation Q(ket, bra_conj) of the Q-function; Q(beta) is the
/// value at (beta, beta*).
inline cplx q_continuation(const QParams& qp, const CVec& ket, const CVec& bra_conj) {
    const int n = qp.modes();
    if (ket.size() != n || bra_conj.size() != n) throw std::invalid_argument("q_function: beta must have N entries");
    CVec b(2 * n);
    b << bra_conj, ket;
    const CMat a = qp.r + sigma_x(n);
    const cplx expo = -0.5 * (b.transpose() * a * b)(0, 0) + (b.transpose() * qp.z)(0, 0);
    return qp.p0 * std::exp(expo);
}

inline double q_function(const QParams& qp, const CVec& beta) {
    const cplx v = q_continuation(qp, beta, beta.conjugate());
    if (std::abs(v.imag()) > kImagResidueAbsolute && std::abs(v.imag()) > kImagResidueRelative * std::abs(v.real())) {
        throw NumericalHealthError("q_function: imaginary residue");
    }
    return std::max(v.real(), 0.0);
}

inline double q_function(const GaussianState& s, const CVec& beta) { return q_function(q_params(s), beta); }

/// Q(B) for B = (beta, beta*) as a 2N-vector.
inline double q_function_b(const GaussianState& s, const CVec& big_b) {
    const int n = s.modes();
    if (big_b.size() != 2 * n) throw std::invalid_argument("q_function: B must have 2N entries");
    const CVec beta = big_b.head(n);
    const double scale = std::max(1.0, big_b.cwiseAbs().maxCoeff());
    if ((big_b.tail(n) - beta.conjugate()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("q_function: second half of B must be the conjugate of the first");
    }
    return q_function(s, beta);
}

// ---------------------------------------------------------------------------
// Inverse map: Q parameters back to the Wigner description
// ---------------------------------------------------------------------------

/// M = U*(R + sigma_x)^-1 U^dag - 1/2,  <Q> = U*(R + sigma_x)^-1 z.
inline GaussianState state_from_q_params(const QParams& qp) {
    const int n = qp.modes();
    const CMat a_inv = mphot::detail::checked_inverse(CMat(qp.r + sigma_x(n)), "R + sigma_x");
    const CMat u = unitary_u(n);
    const CMat m = u.conjugate() * a_inv * u.adjoint() - 0.5 * CMat::Identity(2 * n, 2 * n);
    const CVec mean = u.conjugate() * a_inv * qp.z;
    const double scale = std::max(1.0, mphot::detail::max_abs(m));
    if (mphot::detail::max_abs(CMat(m.imag().cast<cplx>())) > 1e-9 * scale ||
        (mean.size() && mean.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, mean.cwiseAbs().maxCoeff()))) {
        throw NumericalHealthError("state_from_q_params: parameters do not describe a real Gaussian state");
    }
    Mat mr = m.real();
    mr = 0.5 * (mr + mr.transpose()).eval();
    return GaussianState(mean.real(), mr);
}

// ---------------------------------------------------------------------------
// Wigner function and coordinate density matrix
// ---------------------------------------------------------------------------

/// W(p, q) = det(M)^{-1/2} exp[-1/2 (Q - <Q>) M^-1 (Q - <Q>)]; integrates to (2 pi)^N.
inline double wigner_eval(const GaussianState& s, const Vec& p, const Vec& q) {
    const int n = s.modes();
    if (p.size() != n || q.size() != n) throw std::invalid_argument("wigner_eval: p and q must have N entries");
    const double det = s.disp().determinant();
    if (!(det > 0.0)) throw SingularMatrixError("wigner_eval: M is singular");
    Vec d(2 * n);
    d << p, q;
    d -= s.mean();
    const Vec sol = s.disp().ldlt().solve(d);
    return std::exp(-0.5 * d.dot(sol)) / std::sqrt(det);
}

/// <x|rho|x'> of the Gaussian state, by integrating the Wigner function over p
/// in closed form.
inline cplx density_element(const GaussianState& s, const Vec& x, const Vec& xp) {
    const int n = s.modes();
    if (x.size() != n || xp.size() != n) throw std::invalid_argument("density_element: dimension mismatch");
    const double det = s.disp().determinant();
    if (!(det > 0.0)) throw SingularMatrixError("density_element: M is singular");
    const Mat prec = s.disp().inverse();
    const Mat ppp = prec.topLeftCorner(n, n);
    const Mat ppq = prec.topRightCorner(n, n);
    const Mat pqq = prec.bottomRightCorner(n, n);
    const Vec y = 0.5 * (x + xp) - s.mean().tail(n);
    const Vec sdiff = x - xp;
    const cplx i(0.0, 1.0);
    const CVec b = (-(ppq * y)).cast<cplx>() + i * sdiff.cast<cplx>();
    const CMat ppp_inv = ppp.inverse().cast<cplx>();
    const cplx expo = 0.5 * (b.transpose() * ppp_inv * b)(0, 0) - 0.5 * y.dot(pqq * y) +
                      i * s.mean().head(n).dot(sdiff);
    const double pref = std::pow(2.0 * pi, -0.5 * n) / std::sqrt(det * ppp.determinant());
    return pref * std::exp(expo);
}

// ---------------------------------------------------------------------------
// Pure squeezed and correlated states: Psi = N exp(-x.m.x + c.x)
// ---------------------------------------------------------------------------

struct PureGaussian {
    CMat m;
    CVec c;

    PureGaussian(CMat m_in, CVec c_in) : m(std::move(m_in)), c(std::move(c_in)) {
        if (m.rows() != m.cols() || c.size() != m.rows() || m.rows() == 0) {
            throw std::invalid_argument("PureGaussian: m must be N x N and c an N-vector");
        }
        if (mphot::detail::symmetry_defect(m) > kSymmetryTolerance) throw std::invalid_argument("PureGaussian: m is not symmetric");
        Eigen::LLT<Mat> llt(Mat(2.0 * m.real()));
        if (llt.info() != Eigen::Success) throw std::invalid_argument("PureGaussian: m + m* must be positive definite");
    }

    int modes() const { return static_cast<int>(m.rows()); }
};

/// Q parameters of a pure state. R = diag(r*, r) with r* = 1 - (m + 1/2)^-1,
/// z = (w, w*) with w = (m + 1/2)^-1 c / sqrt2, and
/// p0 = det(m+m*)^{1/2}/|det(m+1/2)| exp{-1/4 (c+c*)(m+m*)^-1(c+c*) + 1/4[c(m+1/2)^-1 c + c.c.]}.
inline QParams pure_q_params(const PureGaussian& pg) {
    const int n = pg.modes();
    const CMat id = CMat::Identity(n, n);
    const CMat mh = pg.m + 0.5 * id;
    const CMat mh_inv = mphot::detail::checked_inverse(mh, "m + 1/2");
    const CMat r_star = id - mh_inv;
    CMat r = CMat::Zero(2 * n, 2 * n);
    r.topLeftCorner(n, n) = r_star;
    r.bottomRightCorner(n, n) = r_star.conjugate();
    r = 0.5 * (r + r.transpose()).eval();
    const CVec w = mh_inv * pg.c / std::sqrt(2.0);
    CVec z(2 * n);
    z << w, w.conjugate();

    const Mat s = 2.0 * pg.m.real();
    const Vec cr = 2.0 * pg.c.real();
    const cplx lin = (pg.c.transpose() * mh_inv * pg.c)(0, 0);
    const double expo = -0.25 * cr.dot(s.ldlt().solve(cr)) + 0.5 * lin.real();
    const double p0 = std::sqrt(s.determinant()) / std::abs(mh.determinant()) * std::exp(expo);
    return QParams(std::move(r), std::move(z), std::min(p0, 1.0));
}

/// Conjugate-block Hermite argument y = (Y*, Y), Y* = (m - 1/2)^-1 c / sqrt2; needs m - 1/2 invertible.
inline CVec pure_hermite_argument(const PureGaussian& pg) {
    const int n = pg.modes();
    const CMat ml_inv = mphot::detail::checked_inverse(CMat(pg.m - 0.5 * CMat::Identity(n, n)), "m - 1/2");
    const CVec y_star = ml_inv * pg.c / std::sqrt(2.0);
    CVec y(2 * n);
    y << y_star, y_star.conjugate();
    return y;
}

/// Dispersion blocks s_pp = 2(m^-1 + m*^-1)^-1, s_qq = 1/2 (m + m*)^-1,
/// s_pq = i/2 (m - m*)(m + m*)^-1; the mean goes through the Q parameters.
inline GaussianState gaussian_from_pure(const PureGaussian& pg) {
    const int n = pg.modes();
    const cplx i(0.0, 1.0);
    const CMat sum = pg.m + pg.m.conjugate();
    const CMat sum_inv = mphot::detail::checked_inverse(sum, "m + m*");
    const CMat m_inv = mphot::detail::checked_inverse(pg.m, "m");
    const CMat spp = 2.0 * mphot::detail::checked_inverse(CMat(m_inv + m_inv.conjugate()), "m^-1 + m*^-1");
    const CMat sqq = 0.5 * sum_inv;
    const CMat spq = 0.5 * i * (pg.m - pg.m.conjugate()) * sum_inv;
    Mat disp(2 * n, 2 * n);
    disp.topLeftCorner(n, n) = spp.real();
    disp.topRightCorner(n, n) = spq.real();
    disp.bottomLeftCorner(n, n) = spq.real().transpose();
    disp.bottomRightCorner(n, n) = sqq.real();
    disp = 0.5 * (disp + disp.transpose()).eval();
    const Vec mean = state_from_q_params(pure_q_params(pg)).mean();
    return GaussianState(mean, disp);
}

}  // namespace mphot::gaussian
