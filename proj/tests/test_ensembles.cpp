// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "haarlab/ensembles.hpp"
#include "haarlab/densities.hpp"
#include "haarlab/spectral.hpp"
#include "haarlab/stats.hpp"

namespace {

using namespace haarlab;

class UnitarityBySize : public ::testing::TestWithParam<int> {};

TEST_P(UnitarityBySize, BothMethodsAreUnitary) {
    const int n = GetParam();
    RngStream s(1, static_cast<std::uint64_t>(n));
    for (int i = 0; i < 10; ++i) {
        EXPECT_LE(unitarity_defect(haar_unitary(s, n)), kUnitarityTolerance);
        EXPECT_LE(unitarity_defect(haar_unitary_qr(s, n)), kUnitarityTolerance);
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, UnitarityBySize, ::testing::Values(1, 2, 3, 7, 64, 200));

TEST(Ensembles, IsometryMatchesLeadingColumns) {
    RngStream a(5, 0);
    RngStream b(5, 0);
    const ComplexMatrix u = haar_unitary(a, 9);
    const ComplexMatrix q = haar_isometry(b, 9, 4);
    EXPECT_LE((u.leftCols(4) - q).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(isometry_defect(q), kUnitarityTolerance);
}

TEST(Ensembles, DeterministicForFixedStream) {
    RngStream a(8, 2);
    RngStream b(8, 2);
    EXPECT_EQ(haar_unitary(a, 16), haar_unitary(b, 16));
    EXPECT_EQ(haar_unitary_qr(a, 16), haar_unitary_qr(b, 16));
}

TEST(Ensembles, InvalidSizesThrow) {
    RngStream s(0, 0);
    EXPECT_THROW(haar_unitary(s, 0), std::invalid_argument);
    EXPECT_THROW(haar_isometry(s, 3, 4), std::invalid_argument);
    EXPECT_THROW(ginibre_matrix(s, 0, 2), std::invalid_argument);
    EXPECT_THROW(truncate(ComplexMatrix::Identity(4, 4), TruncationSpec{4, 4, false}),
                 std::invalid_argument);
    EXPECT_THROW(truncate(ComplexMatrix::Identity(4, 4), TruncationSpec{5, 2, false}),
                 std::invalid_argument);
}

TEST(Ensembles, TruncationIsContraction) {
    RngStream s(3, 0);
    for (int i = 0; i < 50; ++i) {
        const ComplexMatrix t = sample_truncation(s, TruncationSpec{10, 3, false});
        EXPECT_LE(spectral_norm(t), 1.0 + 1e-12);
        for (auto const& z : eigenvalues(t).values) {
            EXPECT_LE(std::abs(z), 1.0 + 1e-12);
        }
    }
}

TEST(Ensembles, TruncateScalesBlock) {
    RngStream s(4, 0);
    const ComplexMatrix u = haar_unitary(s, 8);
    const ComplexMatrix t = truncate(u, TruncationSpec{8, 2, true});
    EXPECT_LE((t - u.topLeftCorner(2, 2) * 2.0).cwiseAbs().maxCoeff(), 1e-15);
}

// The two samplers have the same law: compare |U_11|^2 and the eigenangle of
// a randomly chosen eigenvalue with a two-sample KS test.
TEST(Ensembles, GramSchmidtAndQrAgreeInLaw) {
    constexpr int kN = 20000;
    constexpr int kSize = 5;
    McPlan plan{.seed = 21, .streams = 4, .workers = 1};
    auto draw = [&](HaarMethod method) {
        return mc_collect<std::pair<double, double>>(plan, kN, [&](RngStream& s) {
            const ComplexMatrix u = sample_haar(s, kSize, method);
            const Spectrum sp = eigenvalues(u);
            const double angle = sp.angles[s.uniform_index(sp.size())];
            return std::pair{std::norm(u(0, 0)), angle};
        });
    };
    const auto gs = draw(HaarMethod::gram_schmidt);
    const auto qr = draw(HaarMethod::householder_qr);
    std::vector<double> a1, b1, a2, b2;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        a1.push_back(gs[i].first);
        b1.push_back(qr[i].first);
        a2.push_back(gs[i].second);
        b2.push_back(qr[i].second);
    }
    const double crit = ks_two_sample_critical_value(kN, kN);
    EXPECT_LT(ks_two_sample(a1, b1), crit);
    EXPECT_LT(ks_two_sample(a2, b2), crit);
    EXPECT_LT(ks_statistic(a1, [](double r2) { return entry_modulus_cdf(kSize, std::sqrt(r2)); }),
              ks_critical_value(kN));
}

// Left and right translation by a fixed unitary V preserves the law.
TEST(Ensembles, TranslationInvariance) {
    RngStream vs(99, 0);
    const ComplexMatrix v = haar_unitary(vs, 4);
    McPlan plan{.seed = 23, .streams = 4, .workers = 1};
    constexpr int kN = 20000;
    const auto plain = mc_collect<double>(plan, kN, [](RngStream& s) {
        return std::norm(haar_unitary(s, 4)(0, 0));
    });
    const auto moved = mc_collect<double>(plan.with_tag(1), kN, [&](RngStream& s) {
        const ComplexMatrix u = haar_unitary(s, 4);
        return std::norm((v * u * v.adjoint())(0, 0));
    });
    EXPECT_LT(ks_two_sample(plain, moved), ks_two_sample_critical_value(kN, kN));
}

TEST(Ensembles, GinibreLimitEntryVariance) {
    McPlan plan{.seed = 2, .streams = 2, .workers = 1};
    const auto acc = mc_accumulate(plan, 40000, 1, [](RngStream& s, std::span<Complex> out) {
        out[0] = std::norm(sample_ginibre_limit(s, 3)(1, 2));
    });
    EXPECT_LT(z_score(acc[0].mean(), acc[0].std_error_re(), acc[0].std_error_im(), 1.0 / 3.0),
              5.0);
}

}  // namespace
