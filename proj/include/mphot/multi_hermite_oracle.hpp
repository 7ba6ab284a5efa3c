#pragma once

// Reference evaluation of H_n^{R} by expanding exp(-1/2 a.R.a + a.z) as a
// truncated multivariate power series. Shares nothing with the recurrence in
// multi_hermite.hpp beyond the HermiteSpec container; intended for tests.

#include <vector>

#include "mphot/multi_hermite.hpp"

namespace mphot {

inline constexpr int kGenOracleMaxOrder = 10;

namespace detail {

// Dense coefficient array over the box [0, n] (componentwise).
struct TruncatedSeries {
    std::vector<int> extents;
    std::vector<std::size_t> strides;
    std::vector<cplx> coef;

    explicit TruncatedSeries(const MultiIndex& n) {
        for (int e : n.entries()) extents.push_back(e + 1);
        strides = strides_for(extents);
        coef.assign(box_volume(extents), cplx{});
    }

    TruncatedSeries times(const TruncatedSeries& other) const {
        TruncatedSeries out = *this;
        std::fill(out.coef.begin(), out.coef.end(), cplx{});
        const std::size_t dim = extents.size();
        std::vector<int> i(dim, 0);
        std::size_t fi = 0;
        do {
            if (coef[fi] != cplx{}) {
                std::vector<int> j(dim, 0);
                std::size_t fj = 0;
                do {
                    if (other.coef[fj] != cplx{}) {
                        bool inside = true;
                        std::size_t off = 0;
                        for (std::size_t k = 0; k < dim; ++k) {
                            const int s = i[k] + j[k];
                            if (s >= extents[k]) {
                                inside = false;
                                break;
                            }
                            off += static_cast<std::size_t>(s) * strides[k];
                        }
                        if (inside) out.coef[off] += coef[fi] * other.coef[fj];
                    }
                    ++fj;
                } while (next_index(j, extents));
            }
            ++fi;
        } while (next_index(i, extents));
        return out;
    }
};

}  // namespace detail

/// n! times the a^n coefficient of exp(-1/2 a.R.a + a.z); |n| <= 10.
inline cplx hermite_gen_oracle(const HermiteSpec& spec, const MultiIndex& n) {
    if (n.size() != spec.dim()) throw std::invalid_argument("hermite_gen_oracle: dimension mismatch");
    const int order = n.total();
    if (order > kGenOracleMaxOrder) throw std::invalid_argument("hermite_gen_oracle: order cap exceeded");
    const std::size_t dim = spec.dim();
    if (dim == 0 || order == 0) return 1.0;

    // Exponent f(a) = -1/2 a.R.a + a.z, truncated to the box.
    detail::TruncatedSeries f(n);
    auto slot = [&](std::vector<int> e) -> cplx* {
        std::size_t off = 0;
        for (std::size_t k = 0; k < dim; ++k) {
            if (e[k] >= f.extents[k]) return nullptr;
            off += static_cast<std::size_t>(e[k]) * f.strides[k];
        }
        return &f.coef[off];
    };
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<int> e(dim, 0);
        e[i] = 1;
        if (cplx* p = slot(e)) *p += spec.z()(static_cast<Eigen::Index>(i));
        for (std::size_t j = i; j < dim; ++j) {
            std::vector<int> q(dim, 0);
            q[i] += 1;
            q[j] += 1;
            const cplx rij = spec.r()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (cplx* p = slot(q)) *p += (i == j ? -0.5 : -1.0) * rij;
        }
    }

    // exp(f) = sum_k f^k / k!; f has no constant term, so k <= |n| suffices.
    detail::TruncatedSeries sum(n);
    sum.coef[0] = 1.0;
    detail::TruncatedSeries power = sum;
    for (int k = 1; k <= order; ++k) {
        power = power.times(f);
        for (auto& v : power.coef) v /= static_cast<double>(k);
        for (std::size_t t = 0; t < sum.coef.size(); ++t) sum.coef[t] += power.coef[t];
    }
    return n.factorial() * sum.coef.back();
}

}  // namespace mphot
