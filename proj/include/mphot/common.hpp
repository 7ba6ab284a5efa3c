#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mphot {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

/// Raised when a computation loses physical or numerical meaning: uncertainty
/// violation, imaginary residue in a probability, Wronskian drift, singular
/// matrices, ill-conditioned reconstructions. The CLI maps it to exit code 3.
class NumericalHealthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalHealthError {
public:
    using NumericalHealthError::NumericalHealthError;
};

/// Per-slot photon numbers (or Hermite indices).
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int e : entries_) {
            if (e < 0) throw std::invalid_argument("MultiIndex entries must be non-negative");
        }
    }
    MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

    static MultiIndex zeros(std::size_t dim) { return MultiIndex(std::vector<int>(dim, 0)); }

    std::size_t size() const { return entries_.size(); }
    int operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<int>& entries() const { return entries_; }

    int total() const {
        int s = 0;
        for (int e : entries_) s += e;
        return s;
    }

    /// n! = n_1! n_2! ... n_D!
    double factorial() const {
        double f = 1.0;
        for (int e : entries_) f *= std::tgamma(e + 1.0);
        return f;
    }

    /// (n, n): the doubled index used for diagonal density-matrix elements.
    MultiIndex doubled() const {
        std::vector<int> d(entries_);
        d.insert(d.end(), entries_.begin(), entries_.end());
        return MultiIndex(std::move(d));
    }

    MultiIndex concat(const MultiIndex& other) const {
        std::vector<int> d(entries_);
        d.insert(d.end(), other.entries_.begin(), other.entries_.end());
        return MultiIndex(std::move(d));
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> entries_;
};

namespace detail {

/// Row-major strides for a box with the given extents (last slot fastest).
inline std::vector<std::size_t> strides_for(std::span<const int> extents) {
    std::vector<std::size_t> s(extents.size(), 1);
    for (std::size_t k = extents.size(); k-- > 1;) s[k - 1] = s[k] * static_cast<std::size_t>(extents[k]);
    return s;
}

inline std::size_t box_volume(std::span<const int> extents) {
    std::size_t v = 1;
    for (int e : extents) v *= static_cast<std::size_t>(e);
    return v;
}

/// Advance a row-major multi-index inside [0, extents); returns false after the last one.
inline bool next_index(std::vector<int>& idx, std::span<const int> extents) {
    for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < extents[k]) return true;
        idx[k] = 0;
    }
    return false;
}

inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Largest |A - A^t| relative to max(1, max|A|).
template <class Derived>
double symmetry_defect(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Inverse through a rank-revealing LU; throws when the matrix is numerically singular.
template <class MatrixT>
MatrixT checked_inverse(const MatrixT& a, const char* what) {
    Eigen::FullPivLU<MatrixT> lu(a);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) throw SingularMatrixError(std::string("singular matrix: ") + what);
    return lu.inverse();
}

}  // namespace detail

}  // namespace mphot
