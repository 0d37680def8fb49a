// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "haarlab/densities.hpp"
#include "haarlab/quadrature.hpp"
#include "haarlab/stats.hpp"

namespace {

using namespace haarlab;
using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;

double gk(auto f, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Integral over the disc^2 of a radially symmetric two-point density
// C |z1 - z2|^2 g(|z1|) g(|z2|): the relative angle integrates to
// 2pi (r1^2 + r2^2), the common angle to 2pi.
double two_point_radial_integral(double c, auto g, double rmax) {
    auto inner = [&](double r1) {
        return gk([&](double r2) { return r1 * r2 * (r1 * r1 + r2 * r2) * g(r1) * g(r2); }, 0.0,
                  rmax);
    };
    return 4.0 * kPi * kPi * c * gk(inner, 0.0, rmax);
}

TEST(Weyl, NormalizedForTwoAndThree) {
    const double two = integrate_torus2(
                           [](double a, double b) {
                               const std::array<double, 2> t{a, b};
                               return weyl_density(t, 2).value;
                           },
                           16)
                       / (4.0 * kPi * kPi);
    EXPECT_NEAR(two, 1.0, 1e-13);

    // product trapezoid in three angles, exact for this trigonometric polynomial
    constexpr int kPoints = 12;
    const double h = 2.0 * kPi / kPoints;
    double sum = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        for (int j = 0; j < kPoints; ++j) {
            for (int k = 0; k < kPoints; ++k) {
                const std::array<double, 3> t{i * h, j * h, k * h};
                sum += weyl_density(t, 3).value;
            }
        }
    }
    EXPECT_NEAR(sum / (kPoints * kPoints * kPoints), 1.0, 1e-13);
}

TEST(Weyl, MeasureConversion) {
    const std::array<double, 2> t{0.3, 2.0};
    const auto dz = weyl_density(t, 2);
    EXPECT_EQ(dz.measure, Measure::per_dz);
    const auto da = convert_measure(dz, Measure::per_angle);
    EXPECT_NEAR(da.value * 4.0 * kPi * kPi, dz.value, 1e-15);
    EXPECT_NEAR(convert_measure(da, Measure::per_dz).value, dz.value, 1e-15);
    EXPECT_THROW(convert_measure(dz, Measure::per_lebesgue), std::invalid_argument);
    EXPECT_THROW(weyl_density(t, 3), std::invalid_argument);
}

TEST(Weyl, SymmetricAndRotationInvariant) {
    const std::array<double, 3> a{0.1, 1.7, 4.0};
    const std::array<double, 3> b{4.0, 0.1, 1.7};
    const std::array<double, 3> c{0.1 + 2.2, 1.7 + 2.2, 4.0 + 2.2};
    const double v = weyl_density(a, 3).value;
    EXPECT_NEAR(weyl_density(b, 3).value, v, 1e-14 * v);
    EXPECT_NEAR(weyl_density(c, 3).value, v, 1e-13 * v);
}

TEST(Vandermonde, SmallCases) {
    const std::vector<Complex> z{Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
    const Complex expected = (z[0] - z[1]) * (z[0] - z[2]) * (z[1] - z[2]);
    EXPECT_LE(std::abs(vandermonde(z) - expected), 1e-15);
    EXPECT_EQ(vandermonde(std::vector<Complex>{Complex(3, 3)}), Complex(1.0));
}

TEST(TruncationConstant, ClosedForms) {
    EXPECT_NEAR(truncation_constant(4, 2), 6.0 / (kPi * kPi), 1e-15);
    for (int n = 2; n <= 50; ++n) {
        EXPECT_EQ(truncation_constant(n, 1), (n - 1) / kPi) << n;
    }
    // lgamma path against C = (n-2)^2 (n-1) / (2 pi^2) for m = 2
    for (int n : {150, 400, 2000}) {
        const double expected = (n - 2.0) * (n - 2.0) * (n - 1.0) / (2.0 * kPi * kPi);
        EXPECT_NEAR(truncation_constant(n, 2), expected, 1e-11 * expected) << n;
        EXPECT_NEAR(log_truncation_constant(n, 2), std::log(expected), 1e-12);
    }
    EXPECT_THROW(truncation_constant(3, 3), std::invalid_argument);
    EXPECT_THROW(truncation_constant(3, 0), std::invalid_argument);
}

TEST(TruncatedDensity, NormalizedOneAndTwoPoints) {
    for (int n : {2, 3, 5, 9}) {
        auto f = [&](double r) {
            const std::array<Complex, 1> z{Complex(r, 0)};
            return 2.0 * kPi * r * truncated_jpdf(n, 1, z).value;
        };
        EXPECT_NEAR(gk(f, 0.0, 1.0), 1.0, 1e-12) << n;
    }
    for (int n : {3, 4, 6, 10}) {
        const double c = truncation_constant(n, 2);
        auto g = [&](double r) { return std::pow(1.0 - r * r, n - 3); };
        EXPECT_NEAR(two_point_radial_integral(c, g, 1.0), 1.0, 1e-12) << n;
    }
}

TEST(TruncatedDensity, MatchesFormulaPointwise) {
    const std::array<Complex, 2> z{Complex(0.3, -0.2), Complex(-0.5, 0.1)};
    const double expected = truncation_constant(6, 2) * std::norm(z[0] - z[1])
                            * std::pow(1.0 - std::norm(z[0]), 3)
                            * std::pow(1.0 - std::norm(z[1]), 3);
    EXPECT_NEAR(truncated_jpdf(6, 2, z).value, expected, 1e-14 * expected);
    const std::array<Complex, 2> swapped{z[1], z[0]};
    EXPECT_NEAR(truncated_jpdf(6, 2, swapped).value, expected, 1e-14 * expected);
    const Complex rot = std::polar(1.0, 0.7);
    const std::array<Complex, 2> rotated{z[0] * rot, z[1] * rot};
    EXPECT_NEAR(truncated_jpdf(6, 2, rotated).value, expected, 1e-13 * expected);
}

TEST(TruncatedDensity, RejectsBadInput) {
    const std::array<Complex, 2> outside{Complex(1.1, 0), Complex(0, 0)};
    EXPECT_THROW(truncated_jpdf(6, 2, outside), std::invalid_argument);
    const std::array<Complex, 1> one{Complex(0, 0)};
    EXPECT_THROW(truncated_jpdf(6, 2, one), std::invalid_argument);
    // boundary is allowed; n - m - 1 = 0 has no boundary factor
    const std::array<Complex, 1> edge{Complex(1, 0)};
    EXPECT_NEAR(truncated_jpdf(2, 1, edge).value, 1.0 / kPi, 1e-15);
}

// MC integral over D^2 of the (6, 2) density: uniform points on the disc,
// area pi each.
TEST(TruncatedDensity, MonteCarloIntegral) {
    constexpr int kN = 400000;
    McPlan plan{.seed = 43, .streams = 4, .workers = 1};
    const auto acc = mc_accumulate(plan, kN, 1, [](RngStream& s, std::span<Complex> out) {
        std::array<Complex, 2> z;
        for (auto& p : z) {
            const double r = std::sqrt(s.uniform());
            const double t = 2.0 * kPi * s.uniform();
            p = std::polar(r, t);
        }
        out[0] = kPi * kPi * truncated_jpdf(6, 2, z).value;
    });
    EXPECT_TRUE(make_report("integral", 6, acc[0], 1.0, ReferenceKind::exact).within());
    EXPECT_NEAR(acc[0].mean().real(), 1.0, 0.01);
}

TEST(GinibreLimit, Normalized) {
    auto one = [](double r) {
        const std::array<Complex, 1> z{Complex(r, 0)};
        return 2.0 * kPi * r * ginibre_limit_density(1, z).value;
    };
    EXPECT_NEAR(gk(one, 0.0, 10.0), 1.0, 1e-12);
    // m = 2: constant 2^3 / (pi^2 1! 2!), entry variance 1/2
    const double c = 8.0 / (kPi * kPi * 2.0);
    auto g = [](double r) { return std::exp(-2.0 * r * r); };
    EXPECT_NEAR(two_point_radial_integral(c, g, 8.0), 1.0, 1e-12);
    const std::array<Complex, 2> z{Complex(0.2, 0.4), Complex(-0.3, 0.9)};
    EXPECT_NEAR(ginibre_limit_density(2, z).value,
                c * std::norm(z[0] - z[1]) * g(std::abs(z[0])) * g(std::abs(z[1])), 1e-15);
}

TEST(GinibreLimit, ScaledTruncationConverges) {
    const std::vector<std::array<Complex, 2>> points{
        {Complex(0.1, 0.2), Complex(-0.4, 0.3)},
        {Complex(0.8, 0.0), Complex(0.0, -0.9)},
        {Complex(1.2, -0.3), Complex(-0.2, 0.5)},
    };
    for (auto const& w : points) {
        const double limit = ginibre_limit_density(2, w).value;
        const double at_1e3 = scaled_truncated_jpdf(1000, 2, w).value;
        const double at_1e4 = scaled_truncated_jpdf(10000, 2, w).value;
        EXPECT_NEAR(at_1e4, limit, 2e-3 * limit);
        EXPECT_LT(std::abs(at_1e4 - limit), std::abs(at_1e3 - limit));
    }
    const std::array<Complex, 2> far{Complex(50, 0), Complex(0, 0)};
    EXPECT_EQ(scaled_truncated_jpdf(100, 2, far).value, 0.0);
}

TEST(EntryLaw, DensityAndCdfs) {
    for (int n : {2, 5, 16}) {
        auto f = [&](double r) { return 2.0 * kPi * r * entry_density(n, Complex(r, 0)); };
        EXPECT_NEAR(gk(f, 0.0, 1.0), 1.0, 1e-12);
        EXPECT_NEAR(gk(f, 0.0, 0.4), entry_modulus_cdf(n, 0.4), 1e-12);
        EXPECT_NEAR(entry_radial_cdf(n, n * 0.16), entry_modulus_cdf(n, 0.4), 1e-15);
    }
    EXPECT_EQ(entry_density(4, Complex(1.5, 0)), 0.0);
    EXPECT_EQ(entry_radial_cdf(16, 16.0), 1.0);
    EXPECT_EQ(entry_modulus_cdf(16, -1.0), 0.0);
    EXPECT_THROW(entry_radial_cdf(16, 17.0), std::invalid_argument);
    EXPECT_THROW(entry_density(1, Complex(0, 0)), std::invalid_argument);
}

TEST(DensityCsv, Layout) {
    const std::array<Complex, 2> z{Complex(0.1, 0.2), Complex(-0.3, 0.4)};
    std::ostringstream os;
    write_density_csv(os, {truncated_jpdf(5, 2, z)});
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "re_1,im_1,re_2,im_2,value,measure");
    EXPECT_NE(text.find("per_lebesgue"), std::string::npos);
}

}  // namespace
