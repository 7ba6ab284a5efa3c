#pragma once

#include <utility>

#include "mphot/common.hpp"

namespace mphot {

inline constexpr double kSymplecticTolerance = 1e-9;

/// Commutator form for (p_1..p_N, q_1..q_N) ordering: J = [[0, -I], [I, 0]].
inline Mat symplectic_form(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return j;
}

/// Replacement map of a quadratic evolution: the value at phase-space point Q
/// after evolution is the initial value at S Q + shift.
struct LinearSymplecticMap {
    Mat s;
    Vec shift;

    LinearSymplecticMap(Mat s_in, Vec shift_in) : s(std::move(s_in)), shift(std::move(shift_in)) {
        if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0 || shift.size() != s.rows()) {
            throw std::invalid_argument("LinearSymplecticMap: S must be 2N x 2N and shift a 2N-vector");
        }
        const double defect = symplectic_defect();
        if (defect > kSymplecticTolerance) {
            throw std::invalid_argument("LinearSymplecticMap: S^t J S differs from J by " + std::to_string(defect));
        }
    }
    explicit LinearSymplecticMap(Mat s_in) : LinearSymplecticMap(s_in, Vec::Zero(s_in.rows())) {}

    static LinearSymplecticMap identity(int n) { return LinearSymplecticMap(Mat::Identity(2 * n, 2 * n)); }

    /// Free single-mode rotation through angle theta (the quarter period is pi/2).
    static LinearSymplecticMap rotation(double theta) {
        Mat s(2, 2);
        s << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
        return LinearSymplecticMap(s);
    }

    int modes() const { return static_cast<int>(s.rows() / 2); }

    double symplectic_defect() const {
        const Mat j = symplectic_form(modes());
        return (s.transpose() * j * s - j).cwiseAbs().maxCoeff();
    }

    Vec apply(const Vec& x) const { return s * x + shift; }

    LinearSymplecticMap inverse() const {
        const Mat inv = s.inverse();
        return LinearSymplecticMap(inv, -inv * shift);
    }
};

}  // namespace mphot
