#pragma once

// Multimode even/odd coherent states |A+-> = N+-(|A> +- |-A>).
//
// Everything that involves cosh|A|^2 or sinh|A|^2 is evaluated in the log
// domain, so amplitudes up to |A|^2 of a few hundred stay finite.

#include <cmath>
#include <string>
#include <utility>

#include "mphot/common.hpp"

namespace mphot::cat {

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

inline Parity parse_parity(const std::string& s) {
    if (s == "even") return Parity::even;
    if (s == "odd") return Parity::odd;
    throw std::invalid_argument("parity must be \"even\" or \"odd\", got \"" + s + "\"");
}

class CatState {
public:
    CatState(CVec alpha, Parity parity) : alpha_(std::move(alpha)), parity_(parity) {
        if (alpha_.size() == 0) throw std::invalid_argument("CatState: alpha must have at least one mode");
        for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
            if (!std::isfinite(alpha_(i).real()) || !std::isfinite(alpha_(i).imag())) {
                throw std::invalid_argument("CatState: alpha must be finite");
            }
        }
        if (parity_ == Parity::odd && norm_sq() == 0.0) {
            throw std::invalid_argument("CatState: the odd state is undefined at A = 0");
        }
    }

    const CVec& alpha() const { return alpha_; }
    Parity parity() const { return parity_; }
    int modes() const { return static_cast<int>(alpha_.size()); }
    bool even() const { return parity_ == Parity::even; }

    /// |A|^2 = sum_i |alpha_i|^2
    double norm_sq() const { return alpha_.squaredNorm(); }

    CatState flipped() const { return CatState(alpha_, even() ? Parity::odd : Parity::even); }

private:
    CVec alpha_;
    Parity parity_;
};

namespace detail {

inline double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

/// log sinh x for x > 0.
inline double log_sinh(double x) { return x + std::log(-std::expm1(-2.0 * x)) - std::log(2.0); }

/// log cosh|A|^2 (even) or log sinh|A|^2 (odd).
inline double log_parity_fn(const CatState& s) {
    return s.even() ? log_cosh(s.norm_sq()) : log_sinh(s.norm_sq());
}

/// tanh|A|^2 (even) or coth|A|^2 (odd).
inline double parity_ratio(const CatState& s) {
    const double x = s.norm_sq();
    return s.even() ? std::tanh(x) : 1.0 / std::tanh(x);
}

inline void check_mode(const CatState& s, int i) {
    if (i < 0 || i >= s.modes()) throw std::out_of_range("mode index out of range");
}

}  // namespace detail

/// N+ = e^{|A|^2/2}/(2 sqrt(cosh|A|^2)),  N- = e^{|A|^2/2}/(2 sqrt(sinh|A|^2)).
inline double normalization(const CatState& s) {
    return std::exp(0.5 * s.norm_sq() - std::log(2.0) - 0.5 * detail::log_parity_fn(s));
}

/// <n|A+-> = N+- e^{-|A|^2/2} prod(alpha_i^{n_i}/sqrt(n_i!)) (1 +- (-1)^{|n|}).
inline cplx fock_amplitude(const CatState& s, const MultiIndex& n) {
    if (static_cast<int>(n.size()) != s.modes()) throw std::invalid_argument("fock_amplitude: n must have N entries");
    const bool total_even = n.total() % 2 == 0;
    if (total_even != s.even()) return 0.0;
    double log_mag = std::log(2.0) + std::log(normalization(s)) - 0.5 * s.norm_sq();
    cplx phase = 1.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const cplx a = s.alpha()(static_cast<Eigen::Index>(i));
        const int k = n[i];
        if (k == 0) continue;
        if (a == 0.0) return 0.0;
        log_mag += k * std::log(std::abs(a)) - 0.5 * std::lgamma(k + 1.0);
        phase *= std::pow(a / std::abs(a), k);
    }
    return std::exp(log_mag) * phase;
}

struct AnnihilationResult {
    cplx scale;
    CatState out;
};

/// a_i|A+> = alpha_i sqrt(tanh|A|^2)|A->,  a_i|A-> = alpha_i sqrt(coth|A|^2)|A+>.
inline AnnihilationResult apply_annihilation(const CatState& s, int i) {
    detail::check_mode(s, i);
    if (s.norm_sq() == 0.0) throw std::invalid_argument("apply_annihilation: A = 0");
    const cplx scale = s.alpha()(i) * std::sqrt(detail::parity_ratio(s));
    return {scale, s.flipped()};
}

/// P+-(n) = prod(|alpha_i|^{2 n_i}/n_i!) / cosh|A|^2 (sinh for odd), zero on the wrong parity.
inline double photon_distribution(const CatState& s, const MultiIndex& n) {
    if (static_cast<int>(n.size()) != s.modes()) throw std::invalid_argument("photon_distribution: n must have N entries");
    if ((n.total() % 2 == 0) != s.even()) return 0.0;
    double log_p = -detail::log_parity_fn(s);
    for (std::size_t i = 0; i < n.size(); ++i) {
        const int k = n[i];
        if (k == 0) continue;
        const double a2 = std::norm(s.alpha()(static_cast<Eigen::Index>(i)));
        if (a2 == 0.0) return 0.0;
        log_p += k * std::log(a2) - std::lgamma(k + 1.0);
    }
    return std::exp(log_p);
}

inline double mean_photon(const CatState& s, int i) {
    detail::check_mode(s, i);
    return std::norm(s.alpha()(i)) * detail::parity_ratio(s);
}

/// Cov(n_i, n_k):  even  |a_i|^2|a_k|^2 sech^2|A|^2 + delta_ik |a_i|^2 tanh|A|^2,
///                 odd  -|a_i|^2|a_k|^2 csch^2|A|^2 + delta_ik |a_i|^2 coth|A|^2.
inline double number_covariance(const CatState& s, int i, int k) {
    detail::check_mode(s, i);
    detail::check_mode(s, k);
    const double x = s.norm_sq();
    const double ai = std::norm(s.alpha()(i));
    const double ak = std::norm(s.alpha()(k));
    double cross;
    if (s.even()) {
        const double sech = 1.0 / std::cosh(x);
        cross = ai * ak * sech * sech;
    } else {
        const double csch = 1.0 / std::sinh(x);
        cross = -ai * ak * csch * csch;
    }
    return cross + (i == k ? ai * detail::parity_ratio(s) : 0.0);
}

/// Symmetrized second moments of (p_1..p_N, q_1..q_N); the first moments vanish.
inline Mat quadrature_covariance(const CatState& s) {
    const int n = s.modes();
    const double t = s.norm_sq() == 0.0 ? 0.0 : detail::parity_ratio(s);
    Mat m(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cplx aa = s.alpha()(i) * s.alpha()(k);                                  // <a_i a_k>
            const cplx sym = std::conj(s.alpha()(i)) * s.alpha()(k) * t + (i == k ? 0.5 : 0.0);  // <a_i^dag a_k> + delta/2
            m(n + i, n + k) = aa.real() + sym.real();
            m(i, k) = -aa.real() + sym.real();
            m(i, n + k) = aa.imag() - sym.imag();
        }
    }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) m(n + k, i) = m(i, n + k);
    return m;
}

enum class MandelClass { super_poissonian, sub_poissonian, poissonian };

inline const char* to_string(MandelClass c) {
    switch (c) {
        case MandelClass::super_poissonian: return "super";
        case MandelClass::sub_poissonian: return "sub";
        default: return "poissonian";
    }
}

struct MandelResult {
    MandelClass kind;
    double q_value;
};

inline MandelResult classify_mandel(double variance, double mean, double dead_band = 1e-12) {
    if (mean == 0.0) throw std::invalid_argument("mandel_classification: <n> = 0");
    const double q = (variance - mean) / mean;
    if (q > dead_band) return {MandelClass::super_poissonian, q};
    if (q < -dead_band) return {MandelClass::sub_poissonian, q};
    return {MandelClass::poissonian, q};
}

inline MandelResult mandel_classification(const CatState& s, int i) {
    return classify_mandel(number_covariance(s, i, i), mean_photon(s, i));
}

/// Q(beta) = e^{-|beta|^2} |cosh(A.beta*)|^2 / cosh|A|^2 (sinh for odd), written as
/// e^{-|beta|^2} (cosh 2u +- cos 2v) / (2 cosh|A|^2) with u + iv = A.beta*.
inline double q_function(const CatState& s, const CVec& beta) {
    if (beta.size() != s.modes()) throw std::invalid_argument("q_function: beta must have N entries");
    const cplx w = (s.alpha().array() * beta.conjugate().array()).sum();
    const double u = std::abs(w.real());
    const double v = w.imag();
    const double sign = s.even() ? 1.0 : -1.0;
    // cosh 2u +- cos 2v = e^{2u}/2 (1 + e^{-4u} +- 2 e^{-2u} cos 2v)
    const double bracket = 0.5 * (1.0 + std::exp(-4.0 * u) + sign * 2.0 * std::exp(-2.0 * u) * std::cos(2.0 * v));
    const double log_q = -beta.squaredNorm() + 2.0 * u - std::log(2.0) - detail::log_parity_fn(s);
    return std::max(0.0, bracket) * std::exp(log_q);
}

/// Analytic continuation Q(ket g, bra_conj b) = 4N^2 e^{-b.g - |A|^2} cosh(b.A) cosh(g.A*)
/// (sinh for odd); equals q_function at (beta, beta*).
inline cplx q_continuation(const CatState& s, const CVec& ket, const CVec& bra_conj) {
    if (ket.size() != s.modes() || bra_conj.size() != s.modes()) {
        throw std::invalid_argument("q_continuation: arguments must have N entries");
    }
    const cplx wb = (bra_conj.array() * s.alpha().array()).sum();
    const cplx wg = (ket.array() * s.alpha().conjugate().array()).sum();
    const cplx bg = (bra_conj.array() * ket.array()).sum();
    auto f = [&](cplx w) { return s.even() ? std::cosh(w) : std::sinh(w); };
    const double n2 = std::exp(s.norm_sq() - std::log(4.0) - detail::log_parity_fn(s));
    return 4.0 * n2 * std::exp(-bg - s.norm_sq()) * f(wb) * f(wg);
}

/// Wigner symbol of the dyad |A><B|:
/// 2^N exp[-2 Z.Z* + 2 A.Z* + 2 B*.Z - A.B* - |A|^2/2 - |B|^2/2],  Z = (q + ip)/sqrt2.
inline cplx wigner_dyad(const CVec& a, const CVec& b, const Vec& p, const Vec& q) {
    const auto n = a.size();
    if (b.size() != n || p.size() != n || q.size() != n) throw std::invalid_argument("wigner_dyad: dimension mismatch");
    cplx expo = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx z = cplx(q(i), p(i)) / std::sqrt(2.0);
        expo += -2.0 * std::norm(z) + 2.0 * a(i) * std::conj(z) + 2.0 * std::conj(b(i)) * z - a(i) * std::conj(b(i)) -
                0.5 * std::norm(a(i)) - 0.5 * std::norm(b(i));
    }
    return std::exp(expo + static_cast<double>(n) * std::log(2.0));
}

/// |N|^2 (W_{A,A} +- W_{A,-A} +- W_{-A,A} + W_{-A,-A}).
inline double wigner_function(const CatState& s, const Vec& p, const Vec& q) {
    const CVec& a = s.alpha();
    const CVec ma = -a;
    const double sign = s.even() ? 1.0 : -1.0;
    const double log_n2 = s.norm_sq() - std::log(4.0) - detail::log_parity_fn(s);
    const double scale = std::exp(log_n2);
    const cplx sum = wigner_dyad(a, a, p, q) + sign * wigner_dyad(a, ma, p, q) + sign * wigner_dyad(ma, a, p, q) +
                     wigner_dyad(ma, ma, p, q);
    const cplx w = scale * sum;
    const double mag = scale * (std::abs(wigner_dyad(a, a, p, q)) + std::abs(wigner_dyad(a, ma, p, q)) +
                                std::abs(wigner_dyad(ma, a, p, q)) + std::abs(wigner_dyad(ma, ma, p, q)));
    if (std::abs(w.imag()) > 1e-10 * std::max(1.0, mag)) {
        throw NumericalHealthError("cat wigner_function: imaginary residue " + std::to_string(std::abs(w.imag())));
    }
    return w.real();
}

/// Probability of a total photon number, summed over all n with |n| = total:
/// X^total/(total! cosh X) (sinh for odd) when the parity matches, X = |A|^2.
inline double total_photon_probability(const CatState& s, int total) {
    if (total < 0) throw std::invalid_argument("total photon number must be non-negative");
    if ((total % 2 == 0) != s.even()) return 0.0;
    const double x = s.norm_sq();
    if (x == 0.0) return total == 0 ? 1.0 : 0.0;
    return std::exp(total * std::log(x) - std::lgamma(total + 1.0) - detail::log_parity_fn(s));
}

/// Two-mode total distribution: P+(2k) for even states, P-(2k+1) for odd states.
inline double total_photon_distribution(const CatState& s, int k) {
    if (s.modes() != 2) throw std::invalid_argument("total_photon_distribution: requires exactly two modes");
    if (k < 0) throw std::invalid_argument("total_photon_distribution: k must be non-negative");
    return total_photon_probability(s, s.even() ? 2 * k : 2 * k + 1);
}

/// <x|A+-> as a product of coherent wave functions
/// pi^{-1/4} exp(-x^2/2 + sqrt2 a x - a^2/2 - |a|^2/2), combined with N+-.
inline cplx position_wave(const CatState& s, const Vec& x) {
    if (x.size() != s.modes()) throw std::invalid_argument("position_wave: x must have N entries");
    cplx plus = 0.0;
    cplx minus = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const cplx a = s.alpha()(i);
        const cplx common = -0.25 * std::log(pi) - 0.5 * x(i) * x(i) - 0.5 * a * a - 0.5 * std::norm(a);
        plus += common + std::sqrt(2.0) * a * x(i);
        minus += common - std::sqrt(2.0) * a * x(i);
    }
    const double sign = s.even() ? 1.0 : -1.0;
    return normalization(s) * (std::exp(plus) + sign * std::exp(minus));
}

}  // namespace mphot::cat
