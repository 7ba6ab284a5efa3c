#include <gtest/gtest.h>

#include "mphot/cat_states.hpp"
#include "mphot/fock_oracle.hpp"
#include "support/oracles.hpp"

using namespace mphot;
using namespace mphot::cat;
using mphot::oracle::Rng;

namespace {

CVec cvec(std::initializer_list<cplx> xs) {
    CVec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (cplx x : xs) v(i++) = x;
    return v;
}

Vec rvec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

CatState even(std::initializer_list<cplx> a) { return CatState(cvec(a), Parity::even); }
CatState odd(std::initializer_list<cplx> a) { return CatState(cvec(a), Parity::odd); }

// Reference values, computed at 30 digits.
constexpr double kNormEvenUnit = 0.663625300142287539;
constexpr double kSqrtTanh1 = 0.872693620897829692;
constexpr double kSqrtCoth1 = 1.145877517669027008;
constexpr double kVarEvenUnit = 1.181568497569790958;
constexpr double kVarOddUnit = 0.588973624533020837;
constexpr double kQEvenAtOrigin = 0.648054273663885400;
constexpr double kQEvenAtOne = 0.567667641618306346;

}  // namespace

TEST(CatState, ParityParsingAndConstruction) {
    EXPECT_EQ(parse_parity("even"), Parity::even);
    EXPECT_EQ(parse_parity("odd"), Parity::odd);
    EXPECT_THROW(parse_parity("male"), std::invalid_argument);
    EXPECT_THROW(odd({0.0}), std::invalid_argument);
    EXPECT_NO_THROW(even({0.0}));
}

TEST(CatNormalization, ClosedForms) {
    EXPECT_NEAR(normalization(even({0.0})), 0.5, 1e-15);
    EXPECT_NEAR(normalization(even({1.0})), kNormEvenUnit, 1e-15);
    EXPECT_NEAR(normalization(odd({1.0})), std::exp(0.5) / (2.0 * std::sqrt(std::sinh(1.0))), 1e-15);
}

TEST(CatFockAmplitude, ParitySelectionAndLowOrders) {
    const cplx a(0.6, -0.8);
    const auto e = even({a});
    const auto o = odd({a});
    for (int n = 1; n <= 15; n += 2) EXPECT_EQ(fock_amplitude(e, MultiIndex({n})), cplx(0.0));
    for (int n = 0; n <= 14; n += 2) EXPECT_EQ(fock_amplitude(o, MultiIndex({n})), cplx(0.0));
    EXPECT_LT(std::abs(fock_amplitude(e, MultiIndex({0})) - 2.0 * normalization(e) * std::exp(-0.5 * std::norm(a))), 1e-15);
    EXPECT_LT(std::abs(fock_amplitude(o, MultiIndex({1})) - 2.0 * normalization(o) * std::exp(-0.5 * std::norm(a)) * a), 1e-15);

    const auto e2 = even({cplx(0.5, 0.2), cplx(-0.3, 0.7)});
    for (int n1 = 0; n1 <= 6; ++n1)
        for (int n2 = 0; n2 <= 6; ++n2)
            if ((n1 + n2) % 2) {
                EXPECT_EQ(fock_amplitude(e2, MultiIndex({n1, n2})), cplx(0.0));
            }
}

TEST(CatFockAmplitude, MatchesOracleVectorAndDistribution) {
    Rng rng(41);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 2;
        const CVec a = oracle::random_vector(n, rng, 1.0);
        for (bool is_even : {true, false}) {
            const CatState s(a, is_even ? Parity::even : Parity::odd);
            const auto v = fock::cat_vector(a, is_even, 40);
            std::vector<int> idx(static_cast<std::size_t>(n), 0);
            const auto ext = v.extents();
            double total = 0.0;
            do {
                const MultiIndex mi(idx);
                const cplx amp = fock_amplitude(s, mi);
                EXPECT_LT(std::abs(amp - v.at(idx)), 1e-12);
                EXPECT_NEAR(std::norm(amp), photon_distribution(s, mi), 1e-12);
                total += std::norm(amp);
            } while (mphot::detail::next_index(idx, ext));
            EXPECT_NEAR(total, 1.0, 1e-10);
        }
    }
}

TEST(CatAnnihilation, ScaleFactors) {
    const auto e = apply_annihilation(even({1.0}), 0);
    EXPECT_NEAR(std::abs(e.scale - kSqrtTanh1), 0.0, 1e-15);
    EXPECT_EQ(e.out.parity(), Parity::odd);
    const auto o = apply_annihilation(odd({1.0}), 0);
    EXPECT_NEAR(std::abs(o.scale - kSqrtCoth1), 0.0, 1e-15);
    EXPECT_EQ(o.out.parity(), Parity::even);

    const double a = 0.7;
    const cplx product = apply_annihilation(even({a}), 0).scale * apply_annihilation(odd({a}), 0).scale;
    EXPECT_NEAR(std::abs(product - a * a), 0.0, 1e-15);
    EXPECT_THROW(apply_annihilation(even({0.0}), 0), std::invalid_argument);
}

TEST(CatAnnihilation, HoldsInTruncatedFockSpace) {
    for (const CVec& a : {cvec({cplx(0.9, 0.3)}), cvec({cplx(0.4, -0.5), cplx(1.1, 0.2)})}) {
        for (bool is_even : {true, false}) {
            const CatState s(a, is_even ? Parity::even : Parity::odd);
            const auto v = fock::cat_vector(a, is_even, 45);
            for (int mode = 0; mode < s.modes(); ++mode) {
                const auto res = apply_annihilation(s, mode);
                const auto lowered = fock::apply_annihilation(v, mode);
                const auto target = fock::cat_vector(a, !is_even, 45);
                double err = 0.0;
                std::vector<int> idx(static_cast<std::size_t>(s.modes()), 0);
                const auto ext = v.extents();
                do {
                    bool interior = true;
                    for (int k : idx) interior = interior && k < 45;
                    if (interior) err = std::max(err, std::abs(lowered.at(idx) - res.scale * target.at(idx)));
                } while (mphot::detail::next_index(idx, ext));
                EXPECT_LT(err, 1e-10);
            }
        }
    }
}

TEST(CatDistribution, ClosedForms) {
    EXPECT_EQ(photon_distribution(even({0.8}), MultiIndex({1})), 0.0);
    EXPECT_NEAR(photon_distribution(even({1.0, 1.0}), MultiIndex({1, 1})), 1.0 / std::cosh(2.0), 1e-15);
    EXPECT_NEAR(photon_distribution(odd({1.0}), MultiIndex({1})), 1.0 / std::sinh(1.0), 1e-15);
}

TEST(CatDistribution, NormalizationWithinTruncation) {
    Rng rng(43);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 2;
        const CVec a = oracle::random_vector(n, rng, 1.5 / std::sqrt(2.0));
        for (Parity p : {Parity::even, Parity::odd}) {
            const CatState s(a, p);
            std::vector<int> idx(static_cast<std::size_t>(n), 0);
            const std::vector<int> ext(static_cast<std::size_t>(n), 41);
            double total = 0.0;
            do {
                total += photon_distribution(s, MultiIndex(idx));
            } while (mphot::detail::next_index(idx, ext));
            EXPECT_NEAR(total, 1.0, 1e-10);
        }
    }
}

TEST(CatDistribution, ModesAreStatisticallyDependent) {
    const auto s = even({1.0, 1.0});
    const int cap = 40;
    std::vector<double> m1(cap + 1, 0.0), m2(cap + 1, 0.0);
    for (int a = 0; a <= cap; ++a) {
        for (int b = 0; b <= cap; ++b) {
            const double p = photon_distribution(s, MultiIndex({a, b}));
            m1[static_cast<std::size_t>(a)] += p;
            m2[static_cast<std::size_t>(b)] += p;
        }
    }
    // P(1, 0) vanishes by parity while both marginals at 1 and 0 are positive.
    EXPECT_EQ(photon_distribution(s, MultiIndex({1, 0})), 0.0);
    EXPECT_GT(m1[1] * m2[0], 0.05);
}

TEST(CatMoments, MeanPhoton) {
    EXPECT_NEAR(mean_photon(even({1.0}), 0), std::tanh(1.0), 1e-15);
    EXPECT_NEAR(mean_photon(even({6.0}), 0), 36.0, 1e-12);
    EXPECT_NEAR(mean_photon(odd({1e-3}), 0), 1.0, 1e-6);
}

TEST(CatMoments, NumberCovariance) {
    EXPECT_NEAR(number_covariance(even({1.0}), 0, 0), kVarEvenUnit, 1e-14);
    EXPECT_NEAR(number_covariance(odd({1.0}), 0, 0), kVarOddUnit, 1e-14);
    EXPECT_GT(number_covariance(even({1.0}), 0, 0), mean_photon(even({1.0}), 0));
    EXPECT_LT(number_covariance(odd({1.0}), 0, 0), mean_photon(odd({1.0}), 0));
    const double sech2 = 1.0 / std::cosh(2.0);
    EXPECT_NEAR(number_covariance(even({1.0, 1.0}), 0, 1), sech2 * sech2, 1e-15);
}

TEST(CatMoments, MatchFockOracle) {
    for (const CVec& a : {cvec({cplx(1.2, 0.4)}), cvec({cplx(0.8, -0.3), cplx(-0.5, 1.0)})}) {
        for (bool is_even : {true, false}) {
            const CatState s(a, is_even ? Parity::even : Parity::odd);
            const auto mo = fock::moments(fock::cat_vector(a, is_even, 45));
            const Mat cov = quadrature_covariance(s);
            EXPECT_LT(mphot::detail::max_abs(Mat(cov - mo.cov_quad)), 1e-8);
            EXPECT_LT(mo.mean_quad.cwiseAbs().maxCoeff(), 1e-12);
            for (int i = 0; i < s.modes(); ++i) {
                EXPECT_NEAR(mean_photon(s, i), mo.mean_n(i), 1e-10);
                for (int k = 0; k < s.modes(); ++k) EXPECT_NEAR(number_covariance(s, i, k), mo.cov_n(i, k), 1e-9);
            }
        }
    }
}

TEST(CatMoments, QuadratureCovarianceLimitsAndUncertainty) {
    const Mat m0 = quadrature_covariance(even({0.0}));
    EXPECT_LT(mphot::detail::max_abs(Mat(m0 - 0.5 * Mat::Identity(2, 2))), 1e-15);
    const Mat mo = quadrature_covariance(odd({1.0}));
    // q-variance = <a a> + <a^dag a> + 1/2 with real alpha = 1.
    EXPECT_NEAR(mo(1, 1), 1.0 + 1.0 / std::tanh(1.0) + 0.5, 1e-14);
    // The quadratic form M + (i/2) J is positive for these physical states.
    for (const CatState& s : {even({cplx(0.7, 0.2), 0.4}), odd({cplx(1.1, -0.5)})}) {
        const int n = s.modes();
        const Mat m = quadrature_covariance(s);
        Mat j = Mat::Zero(2 * n, 2 * n);
        j.topRightCorner(n, n) = -Mat::Identity(n, n);
        j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
        const CMat h = m.cast<cplx>() + cplx(0.0, 0.5) * j.cast<cplx>();
        Eigen::SelfAdjointEigenSolver<CMat> es(h);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(CatMandel, SignsAcrossAmplitudes) {
    for (double a = 0.2; a <= 2.0 + 1e-9; a += 0.1) {
        const auto e = mandel_classification(even({a}), 0);
        const auto o = mandel_classification(odd({a}), 0);
        EXPECT_EQ(e.kind, MandelClass::super_poissonian) << a;
        EXPECT_GT(e.q_value, 0.0);
        EXPECT_EQ(o.kind, MandelClass::sub_poissonian) << a;
        EXPECT_LT(o.q_value, 0.0);
    }
    EXPECT_EQ(classify_mandel(1.5, 1.5).kind, MandelClass::poissonian);
    EXPECT_THROW(mandel_classification(even({0.0}), 0), std::invalid_argument);
}

TEST(CatQFunction, ClosedFormValues) {
    EXPECT_EQ(q_function(odd({cplx(0.7, 0.3)}), cvec({0.0})), 0.0);
    EXPECT_NEAR(q_function(even({1.0}), cvec({0.0})), kQEvenAtOrigin, 1e-15);
    EXPECT_NEAR(q_function(even({1.0}), cvec({1.0})), kQEvenAtOne, 1e-15);
}

TEST(CatQFunction, MatchesFockOracleOnGrid) {
    for (cplx a : {cplx(1.0, 0.0), cplx(0.6, -1.1)}) {
        for (bool is_even : {true, false}) {
            const CatState s(cvec({a}), is_even ? Parity::even : Parity::odd);
            const auto v = fock::cat_vector(cvec({a}), is_even, 50);
            for (int i = 0; i < 20; ++i) {
                for (int k = 0; k < 20; ++k) {
                    const cplx beta(-2.5 + 5.0 * i / 19.0, -2.5 + 5.0 * k / 19.0);
                    EXPECT_NEAR(q_function(s, cvec({beta})), fock::q_overlap(v, cvec({beta})), 1e-9);
                }
            }
        }
    }
}

TEST(CatQFunction, ContinuationOnDiagonalAndNormalization) {
    const auto s = odd({cplx(0.9, 0.4)});
    const cplx beta(0.3, -0.7);
    EXPECT_NEAR(std::abs(q_continuation(s, cvec({beta}), cvec({std::conj(beta)})) - q_function(s, cvec({beta}))), 0.0, 1e-15);
    double acc = 0.0;
    const double h = 0.04;
    for (double re = -7.0; re <= 7.0; re += h)
        for (double im = -7.0; im <= 7.0; im += h) acc += q_function(s, cvec({cplx(re, im)}));
    EXPECT_NEAR(acc * h * h / pi, 1.0, 1e-8);
}

TEST(CatWigner, DyadLimits) {
    EXPECT_NEAR(std::abs(wigner_dyad(cvec({0.0}), cvec({0.0}), rvec({0.0}), rvec({0.0})) - 2.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(wigner_dyad(cvec({0.0, 0.0}), cvec({0.0, 0.0}), rvec({0.0, 0.0}), rvec({0.0, 0.0})) - 4.0), 0.0, 1e-14);
    const cplx a(0.6, -0.4);
    for (double p : {-1.0, 0.3}) {
        for (double q : {-0.2, 1.4}) {
            const cplx z = cplx(q, p) / std::sqrt(2.0);
            const cplx got = wigner_dyad(cvec({a}), cvec({a}), rvec({p}), rvec({q}));
            EXPECT_NEAR(std::abs(got - 2.0 * std::exp(-2.0 * std::norm(z - a))), 0.0, 1e-14);
        }
    }
    double acc = 0.0;
    const double h = 0.05;
    for (double p = -8.0; p <= 8.0; p += h)
        for (double q = -8.0; q <= 8.0; q += h) acc += wigner_dyad(cvec({a}), cvec({a}), rvec({p}), rvec({q})).real();
    EXPECT_NEAR(acc * h * h / (2.0 * pi), 1.0, 1e-6);
}

TEST(CatWigner, ParityAnchorsAtOrigin) {
    for (double mag = 0.1; mag <= 3.0 + 1e-9; mag += 0.1) {
        const cplx a = std::polar(mag, 0.37 * mag);
        EXPECT_NEAR(wigner_function(odd({a}), rvec({0.0}), rvec({0.0})), -2.0, 1e-10) << mag;
        EXPECT_NEAR(wigner_function(even({a}), rvec({0.0}), rvec({0.0})), 2.0, 1e-10) << mag;
    }
}

TEST(CatWigner, FringesBetweenPeaks) {
    // For real alpha the two peaks sit at q = +-sqrt2 alpha and the fringes run along p.
    const auto s = even({3.0});
    EXPECT_GT(wigner_function(s, rvec({0.0}), rvec({std::sqrt(2.0) * 3.0})), 0.9);
    int sign_changes = 0;
    double prev = wigner_function(s, rvec({0.0}), rvec({0.0}));
    for (double p = 0.05; p <= 2.0; p += 0.05) {
        const double w = wigner_function(s, rvec({p}), rvec({0.0}));
        if ((w > 0) != (prev > 0)) ++sign_changes;
        prev = w;
    }
    EXPECT_GE(sign_changes, 3);
}

TEST(CatWigner, MatchesFockDensityThroughMarginal) {
    // The p-integral of W gives the position density |psi(q)|^2.
    const auto s = odd({cplx(0.8, 0.5)});
    const auto v = fock::cat_vector(cvec({cplx(0.8, 0.5)}), false, 45);
    for (double q : {-1.2, 0.0, 0.7}) {
        double acc = 0.0;
        const double h = 0.02;
        for (double p = -9.0; p <= 9.0; p += h) acc += wigner_function(s, rvec({p}), rvec({q}));
        const double want = std::norm(fock::position_wave(v, {q})[0]);
        EXPECT_NEAR(acc * h / (2.0 * pi), want, 1e-9);
        EXPECT_NEAR(std::norm(position_wave(s, rvec({q}))), want, 1e-12);
    }
}

TEST(CatTotalPhotons, ClosedFormsAndMarginalSums) {
    EXPECT_NEAR(total_photon_distribution(even({1.0, 1.0}), 0), 1.0 / std::cosh(2.0), 1e-15);
    EXPECT_THROW(total_photon_distribution(even({1.0}), 0), std::invalid_argument);
    for (bool is_even : {true, false}) {
        const CatState s(cvec({cplx(0.9, 0.2), cplx(-0.4, 0.6)}), is_even ? Parity::even : Parity::odd);
        for (int k = 0; k <= 10; ++k) {
            const int total = is_even ? 2 * k : 2 * k + 1;
            double brute = 0.0;
            for (int n1 = 0; n1 <= total; ++n1) brute += photon_distribution(s, MultiIndex({n1, total - n1}));
            EXPECT_NEAR(total_photon_distribution(s, k), brute, 1e-12);
        }
    }
    const auto big = even({cplx(1.2, 0.5), cplx(0.8, -1.0)});
    ASSERT_LE(big.norm_sq(), 4.0);
    double sum = 0.0;
    for (int k = 0; k <= 40; ++k) sum += total_photon_distribution(big, k);
    EXPECT_NEAR(sum, 1.0, 1e-10);
}
