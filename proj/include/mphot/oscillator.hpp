#pragma once

// Parametric oscillator H = p^2/2 + w^2(t) x^2/2 with w(0) = 1.
//
// The classical solution e(t) of  e'' + w^2(t) e = 0,  e(0) = 1, e'(0) = i
// defines the integral of motion A = (i/sqrt2)(e p - e' x), the Gaussian and
// cat packets, and the linear phase-space map used for Wigner evolution.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mphot/cat_states.hpp"
#include "mphot/common.hpp"
#include "mphot/symplectic.hpp"

namespace mphot::osc {

inline constexpr double kWronskianTolerance = 1e-9;

enum class ProfileKind { constant, step, ramp, sinusoidal, table };

/// w^2(t) as a piecewise formula. Breakpoints split the integrator steps, and
/// on a breakpoint the piece is chosen by a caller-supplied probe time, so
/// the step profile is integrated exactly as two smooth pieces.
class FrequencyProfile {
public:
    static FrequencyProfile constant() { return FrequencyProfile(ProfileKind::constant); }

    /// w^2 = 1 for t < t0, `after` for t >= t0.
    static FrequencyProfile step(double t0, double after) {
        if (!(t0 > 0.0)) throw std::invalid_argument("step profile: t0 must be positive");
        FrequencyProfile p(ProfileKind::step);
        p.t0_ = t0;
        p.value_ = after;
        return p;
    }

    /// Linear change of w^2 from 1 at t0 to `end_value` at t1.
    static FrequencyProfile ramp(double t0, double t1, double end_value) {
        if (!(t0 >= 0.0 && t1 > t0)) throw std::invalid_argument("ramp profile: need 0 <= t0 < t1");
        FrequencyProfile p(ProfileKind::ramp);
        p.t0_ = t0;
        p.t1_ = t1;
        p.value_ = end_value;
        return p;
    }

    /// w^2 = 1 + amplitude sin(frequency t).
    static FrequencyProfile sinusoidal(double amplitude, double frequency) {
        FrequencyProfile p(ProfileKind::sinusoidal);
        p.value_ = amplitude;
        p.freq_ = frequency;
        return p;
    }

    /// Linear interpolation through (t_k, w^2_k); constant beyond the last node.
    static FrequencyProfile table(std::vector<double> times, std::vector<double> values) {
        if (times.size() < 2 || times.size() != values.size()) {
            throw std::invalid_argument("table profile: need at least two (t, omega_sq) nodes");
        }
        if (times.front() != 0.0) throw std::invalid_argument("table profile: first node must be at t = 0");
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(times[k] > times[k - 1])) throw std::invalid_argument("table profile: times must increase strictly");
        }
        if (std::abs(values.front() - 1.0) > 1e-12) throw std::invalid_argument("table profile: omega_sq(0) must be 1");
        FrequencyProfile p(ProfileKind::table);
        p.times_ = std::move(times);
        p.values_ = std::move(values);
        return p;
    }

    ProfileKind kind() const { return kind_; }

    /// w^2 at t, using the piece that contains `probe` (pass t itself away from breakpoints).
    double omega_sq(double t, double probe) const {
        switch (kind_) {
            case ProfileKind::constant: return 1.0;
            case ProfileKind::step: return probe < t0_ ? 1.0 : value_;
            case ProfileKind::ramp:
                if (probe < t0_) return 1.0;
                if (probe >= t1_) return value_;
                return 1.0 + (value_ - 1.0) * (t - t0_) / (t1_ - t0_);
            case ProfileKind::sinusoidal: return 1.0 + value_ * std::sin(freq_ * t);
            case ProfileKind::table: {
                if (probe >= times_.back()) return values_.back();
                const auto it = std::upper_bound(times_.begin(), times_.end(), probe);
                const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - times_.begin())) - 1;
                const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
                return values_[k] + w * (values_[k + 1] - values_[k]);
            }
        }
        return 1.0;
    }
    double omega_sq(double t) const { return omega_sq(t, t); }

    /// Times where the formula changes, sorted.
    std::vector<double> breakpoints() const {
        switch (kind_) {
            case ProfileKind::step: return {t0_};
            case ProfileKind::ramp: return t0_ > 0.0 ? std::vector<double>{t0_, t1_} : std::vector<double>{t1_};
            case ProfileKind::table: return std::vector<double>(times_.begin() + 1, times_.end());
            default: return {};
        }
    }

private:
    explicit FrequencyProfile(ProfileKind k) : kind_(k) {}

    ProfileKind kind_;
    double t0_ = 0.0;
    double t1_ = 0.0;
    double value_ = 1.0;
    double freq_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// e(t), e'(t) and the continuously tracked phase of e.
struct EpsilonSample {
    double t = 0.0;
    cplx eps = 1.0;
    cplx eps_dot = cplx(0.0, 1.0);
    double phase = 0.0;

    /// e' e* - e'* e (equals 2i exactly for the true solution).
    cplx wronskian() const { return eps_dot * std::conj(eps) - std::conj(eps_dot) * eps; }
};

namespace detail {

struct Pair {
    cplx e, d;
};

// One classical RK4 step of (e, e') over [t, t + h] using the profile piece of `probe`.
inline Pair rk4(const FrequencyProfile& prof, double t, double h, Pair y, double probe) {
    auto f = [&](double tt, const Pair& s) { return Pair{s.d, -prof.omega_sq(tt, probe) * s.e}; };
    const Pair k1 = f(t, y);
    const Pair k2 = f(t + 0.5 * h, {y.e + 0.5 * h * k1.e, y.d + 0.5 * h * k1.d});
    const Pair k3 = f(t + 0.5 * h, {y.e + 0.5 * h * k2.e, y.d + 0.5 * h * k2.d});
    const Pair k4 = f(t + h, {y.e + h * k3.e, y.d + h * k3.d});
    return {y.e + h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e), y.d + h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d)};
}

// Advance from t0 to t1 (t1 >= t0), splitting at breakpoints.
inline Pair advance(const FrequencyProfile& prof, const std::vector<double>& breaks, double t0, double t1, Pair y) {
    double t = t0;
    while (t < t1) {
        double stop = t1;
        for (double b : breaks) {
            if (b > t && b < stop) stop = b;
        }
        y = rk4(prof, t, stop - t, y, 0.5 * (t + stop));
        t = stop;
    }
    return y;
}

inline double wrap_to_pi(double a) { return std::remainder(a, 2.0 * pi); }

}  // namespace detail

/// Fixed-step RK4 trajectory of e(t). Construction rejects the result when the
/// Wronskian leaves 2i by more than the tolerance at any sample.
class EpsilonTrajectory {
public:
    EpsilonTrajectory(FrequencyProfile profile, double t_end, double dt) : profile_(std::move(profile)) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("solve_epsilon: dt must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("solve_epsilon: t_end must be positive");
        if (std::abs(profile_.omega_sq(0.0, 0.0) - 1.0) > 1e-12) {
            throw std::invalid_argument("solve_epsilon: omega_sq(0) must be 1");
        }
        breaks_ = profile_.breakpoints();
        const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
        samples_.reserve(steps + 1);
        samples_.push_back(EpsilonSample{});
        detail::Pair y{1.0, cplx(0.0, 1.0)};
        for (std::size_t k = 1; k <= steps; ++k) {
            const double ta = static_cast<double>(k - 1) * dt;
            const double tb = k == steps ? t_end : static_cast<double>(k) * dt;
            y = detail::advance(profile_, breaks_, ta, tb, y);
            samples_.push_back(make_sample(samples_.back(), tb, y));
        }
        for (const auto& s : samples_) {
            const double drift = std::abs(s.wronskian() - cplx(0.0, 2.0));
            max_drift_ = std::max(max_drift_, drift);
            if (!(drift <= kWronskianTolerance)) {
                throw NumericalHealthError("solve_epsilon: Wronskian drift " + std::to_string(drift) + " at t = " +
                                           std::to_string(s.t) + "; reduce dt");
            }
        }
    }

    const FrequencyProfile& profile() const { return profile_; }
    const std::vector<EpsilonSample>& samples() const { return samples_; }
    double t_end() const { return samples_.back().t; }
    double max_wronskian_drift() const { return max_drift_; }

    /// State at an arbitrary t in [0, t_end], by a partial step from the preceding sample.
    EpsilonSample at(double t) const {
        if (!(t >= 0.0 && t <= t_end() + 1e-12)) throw std::out_of_range("trajectory: t outside [0, t_end]");
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const EpsilonSample& s) { return v < s.t; });
        const EpsilonSample& base = *(it - 1);
        if (base.t == t) return base;
        const detail::Pair y = detail::advance(profile_, breaks_, base.t, t, {base.eps, base.eps_dot});
        return make_sample(base, t, y);
    }

private:
    static EpsilonSample make_sample(const EpsilonSample& prev, double t, const detail::Pair& y) {
        EpsilonSample s;
        s.t = t;
        s.eps = y.e;
        s.eps_dot = y.d;
        s.phase = prev.phase + detail::wrap_to_pi(std::arg(y.e) - std::arg(prev.eps));
        return s;
    }

    FrequencyProfile profile_;
    std::vector<double> breaks_;
    std::vector<EpsilonSample> samples_;
    double max_drift_ = 0.0;
};

inline EpsilonTrajectory solve_epsilon(const FrequencyProfile& profile, double t_end, double dt) {
    return EpsilonTrajectory(profile, t_end, dt);
}

struct Variances {
    double sigma_x;
    double sigma_p;
    double r;  ///< position-momentum correlation coefficient
};

/// s_x = |e|^2/2, s_p = |e'|^2/2, r = Re(e e'*)/2 / sqrt(s_x s_p).
inline Variances variances(const EpsilonSample& s) {
    const double sx = 0.5 * std::norm(s.eps);
    const double sp = 0.5 * std::norm(s.eps_dot);
    const double sxp = 0.5 * (s.eps * std::conj(s.eps_dot)).real();
    return {sx, sp, sxp / std::sqrt(sx * sp)};
}

inline Variances variances(const EpsilonTrajectory& traj, double t) { return variances(traj.at(t)); }

namespace detail {

inline void check_caustic(const EpsilonSample& s) {
    if (std::abs(s.eps) < 1e-12) throw NumericalHealthError("packet: e(t) vanishes (caustic)");
}

/// pi^{-1/4} e^{-1/2} exp(i e' x^2 / 2e) in log form, with the tracked branch of e^{-1/2}.
inline cplx log_ground(const EpsilonSample& s, double x) {
    const cplx log_root = cplx(-0.5 * std::log(std::abs(s.eps)), -0.5 * s.phase);
    return -0.25 * std::log(pi) + log_root + cplx(0.0, 1.0) * s.eps_dot * x * x / (2.0 * s.eps);
}

}  // namespace detail

inline cplx ground_packet(const EpsilonSample& s, double x) {
    detail::check_caustic(s);
    return std::exp(detail::log_ground(s, x));
}

/// Psi_alpha = Psi_0 exp{-|a|^2/2 - a^2 e*/(2e) + sqrt2 a x / e}: eigenfunction of A with eigenvalue alpha.
inline cplx coherent_packet(cplx alpha, const EpsilonSample& s, double x) {
    detail::check_caustic(s);
    const cplx expo = detail::log_ground(s, x) - 0.5 * std::norm(alpha) - alpha * alpha * std::conj(s.eps) / (2.0 * s.eps) +
                      std::sqrt(2.0) * alpha * x / s.eps;
    return std::exp(expo);
}

inline cplx coherent_packet(cplx alpha, const EpsilonTrajectory& traj, double t, double x) {
    return coherent_packet(alpha, traj.at(t), x);
}

/// Even (cosh) and odd (sinh) packets: eigenfunctions of A^2 with eigenvalue alpha^2.
inline cplx cat_packet(cplx alpha, cat::Parity parity, const EpsilonSample& s, double x) {
    detail::check_caustic(s);
    const double norm = cat::normalization(cat::CatState(CVec::Constant(1, alpha), parity));
    const cplx base = detail::log_ground(s, x) - 0.5 * std::norm(alpha) - std::conj(s.eps) * alpha * alpha / (2.0 * s.eps);
    const cplx w = std::sqrt(2.0) * alpha * x / s.eps;
    const double sign = parity == cat::Parity::even ? 1.0 : -1.0;
    // 2N cosh(w) e^{base} = N (e^{base + w} +- e^{base - w})
    return norm * (std::exp(base + w) + sign * std::exp(base - w));
}

inline cplx cat_packet(cplx alpha, cat::Parity parity, const EpsilonTrajectory& traj, double t, double x) {
    return cat_packet(alpha, parity, traj.at(t), x);
}

/// Map from the current (p, q) to the initial (p0, q0):
/// p0 = Re(e) p - Re(e') q,  q0 = -Im(e) p + Im(e') q.
inline LinearSymplecticMap symplectic_map(const EpsilonSample& s) {
    const double drift = std::abs(s.wronskian() - cplx(0.0, 2.0));
    if (drift > kWronskianTolerance) throw NumericalHealthError("symplectic_map: Wronskian-degraded trajectory");
    Mat m(2, 2);
    m << s.eps.real(), -s.eps_dot.real(), -s.eps.imag(), s.eps_dot.imag();
    return LinearSymplecticMap(m);
}

inline LinearSymplecticMap symplectic_map(const EpsilonTrajectory& traj, double t) { return symplectic_map(traj.at(t)); }

// ---------------------------------------------------------------------------
// Periodic x-grid and the discretized integral of motion
// ---------------------------------------------------------------------------

struct PacketGrid {
    std::vector<double> x;
    double h = 0.0;
};

/// n equally spaced points on [-half_width, half_width), periodic.
inline PacketGrid periodic_grid(double half_width, int n) {
    if (n < 2 || !(half_width > 0.0)) throw std::invalid_argument("periodic_grid: bad grid");
    PacketGrid g;
    g.h = 2.0 * half_width / n;
    for (int j = 0; j < n; ++j) g.x.push_back(-half_width + j * g.h);
    return g;
}

/// d/dx by discrete Fourier transform on the periodic grid (direct O(n^2) sums).
inline std::vector<cplx> spectral_derivative(const PacketGrid& g, const std::vector<cplx>& f) {
    const int n = static_cast<int>(f.size());
    const double length = g.h * n;
    std::vector<cplx> coef(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (int j = 0; j < n; ++j) acc += f[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * pi * k * j / n);
        coef[static_cast<std::size_t>(k)] = acc;
    }
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const int kk = k <= n / 2 ? k : k - n;
            if (2 * k == n) continue;  // Nyquist mode has no odd derivative
            acc += coef[static_cast<std::size_t>(k)] * cplx(0.0, 2.0 * pi * kk / length) *
                   std::polar(1.0, 2.0 * pi * k * j / n);
        }
        out[static_cast<std::size_t>(j)] = acc / static_cast<double>(n);
    }
    return out;
}

/// A psi = (i/sqrt2)(e p - e' x) psi with p = -i d/dx.
inline std::vector<cplx> apply_integral_of_motion(const EpsilonSample& s, const PacketGrid& g, const std::vector<cplx>& psi) {
    const auto dpsi = spectral_derivative(g, psi);
    std::vector<cplx> out(psi.size());
    const cplx i(0.0, 1.0);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        out[j] = i / std::sqrt(2.0) * (s.eps * (-i) * dpsi[j] - s.eps_dot * g.x[j] * psi[j]);
    }
    return out;
}

/// sqrt(h sum |f|^2)
inline double grid_norm(const PacketGrid& g, const std::vector<cplx>& f) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return std::sqrt(g.h * s);
}

}  // namespace mphot::osc
