// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "haarlab/moments.hpp"
#include "haarlab/stats.hpp"

namespace {

using namespace haarlab;

TEST(Accumulator, MatchesTwoPassFormulas) {
    const std::vector<double> x{1.0, 4.0, -2.0, 3.5, 0.25, 7.0};
    Accumulator a;
    Accumulator left;
    Accumulator right;
    for (std::size_t i = 0; i < x.size(); ++i) {
        a.add(Complex(x[i], -x[i]));
        (i < 2 ? left : right).add(Complex(x[i], -x[i]));
    }
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= x.size();
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double var = ss / (x.size() - 1);
    EXPECT_NEAR(a.mean().real(), mean, 1e-14);
    EXPECT_NEAR(a.mean().imag(), -mean, 1e-14);
    EXPECT_NEAR(a.variance_re(), var, 1e-13);
    EXPECT_NEAR(a.std_error_im(), std::sqrt(var / x.size()), 1e-14);
    left.merge(right);
    EXPECT_NEAR(left.mean().real(), mean, 1e-14);
    EXPECT_NEAR(left.variance_im(), var, 1e-13);
    EXPECT_EQ(left.count(), 6);
}

TEST(ZScore, ComponentwiseMaximum) {
    EXPECT_DOUBLE_EQ(z_score(Complex(1.0, 0.0), 0.5, 1.0, Complex(0.0, 0.0)), 2.0);
    EXPECT_DOUBLE_EQ(z_score(Complex(0.0, 3.0), 0.5, 1.0, Complex(0.0, 0.0)), 3.0);
    // rounding-level deviation of a constant statistic is not evidence
    EXPECT_EQ(z_score(Complex(1.0 + 1e-15, 0.0), 0.0, 0.0, Complex(1.0, 0.0)), 0.0);
    EXPECT_TRUE(std::isinf(z_score(Complex(1.1, 0.0), 0.0, 0.0, Complex(1.0, 0.0))));
}

TEST(Reports, JsonRoundTripAndCsv) {
    Accumulator acc;
    for (int i = 0; i < 10; ++i) {
        acc.add(Complex(i * 0.1, 1.0 - i * 0.05));
    }
    const auto r = make_report("E|Tr U|^2", 8, acc, Complex(0.5, 0.7), ReferenceKind::limit);
    const auto back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.statistic, r.statistic);
    EXPECT_EQ(back.n, 8);
    EXPECT_EQ(back.samples, 10);
    EXPECT_EQ(back.estimate, r.estimate);
    EXPECT_EQ(back.std_error, r.std_error);
    EXPECT_EQ(back.reference, r.reference);
    EXPECT_EQ(back.reference_kind, ReferenceKind::limit);
    EXPECT_EQ(back.z_score, r.z_score);
    EXPECT_DOUBLE_EQ(r.std_error, std::hypot(r.std_error_re, r.std_error_im));

    std::ostringstream os;
    write_reports_csv(os, {r, r});
    const std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    EXPECT_EQ(text.rfind("statistic,n,N,", 0), 0u);

    const auto none = make_report("x", 1, acc, Complex(100.0), ReferenceKind::none);
    EXPECT_EQ(none.z_score, 0.0);
}

// 100 estimates of known means (moments of complex normals and uniforms): the
// 5-SE band should essentially never fail, and about 95% fall within 2 SE.
TEST(Calibration, CorpusOfKnownMeans) {
    constexpr int kCorpus = 100;
    constexpr int kN = 4000;
    int within5 = 0;
    int within2 = 0;
    for (int c = 0; c < kCorpus; ++c) {
        McPlan plan{.seed = 1000u + static_cast<std::uint64_t>(c), .streams = 2, .workers = 1};
        const int k = c % 3;
        const int l = (c / 3) % 3;
        EstimateReport r;
        if (c % 2 == 0) {
            r = mc_estimate("xi moment", 0, kN, plan, [&](RngStream& s) {
                const Complex z = complex_normal(s);
                return std::pow(z, k) * std::pow(std::conj(z), l);
            }, Complex(static_cast<double>(complex_normal_moment(k, l))));
        } else {
            r = mc_estimate("uniform power", 0, kN, plan, [&](RngStream& s) {
                return Complex(std::pow(s.uniform(), k + l + 1));
            }, Complex(1.0 / (k + l + 2)));
        }
        within5 += r.within() ? 1 : 0;
        within2 += r.within(2.0) ? 1 : 0;
    }
    EXPECT_GE(within5, 99);
    EXPECT_GE(within2, 85);
    EXPECT_LE(within2, 100);
}

TEST(Ks, OneSampleKnownValue) {
    // samples at 0.1, 0.2, 0.9 against U[0,1]: D = max(1/3-0.1, 2/3-0.2, 1-0.9, 0.9-2/3)
    const double d = ks_statistic(std::vector<double>{0.9, 0.1, 0.2}, [](double x) { return x; });
    EXPECT_NEAR(d, 2.0 / 3.0 - 0.2, 1e-15);
    EXPECT_THROW(ks_statistic(std::vector<double>{}, [](double x) { return x; }),
                 std::invalid_argument);
}

TEST(Ks, TwoSampleKnownValue) {
    EXPECT_NEAR(ks_two_sample({1, 2, 3}, {1.5, 2.5, 3.5}), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(ks_two_sample({1, 2}, {3, 4}), 1.0, 1e-15);
    EXPECT_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
}

TEST(Ks, CriticalValues) {
    EXPECT_DOUBLE_EQ(ks_critical_value(10000), 1.63 / 100.0);
    EXPECT_DOUBLE_EQ(ks_two_sample_critical_value(100, 100), 1.63 * std::sqrt(2.0 / 100.0));
    EXPECT_THROW(ks_coefficient(1.5), std::invalid_argument);
    EXPECT_NEAR(ks_coefficient(0.05), 1.358, 1e-3);
}

TEST(Ks, FalseRejectionRateNearAlpha) {
    int rejected = 0;
    for (int t = 0; t < 400; ++t) {
        RngStream s(77, static_cast<std::uint64_t>(t));
        std::vector<double> u(500);
        for (auto& v : u) {
            v = s.uniform();
        }
        rejected += ks_statistic(u, [](double x) { return x; }) >= ks_critical_value(500) ? 1 : 0;
    }
    EXPECT_LE(rejected, 12);  // alpha = 0.01, 400 trials
}

TEST(Correlation, KnownLinearRelation) {
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) {
        x.push_back(i);
        y.push_back(3.0 * i - 2.0);
    }
    const auto c = pearson_correlation(x, y);
    EXPECT_NEAR(c.r, 1.0, 1e-14);
    EXPECT_NEAR(c.std_error, 0.0, 1e-12);
    EXPECT_THROW(pearson_correlation(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                 std::domain_error);
}

// Bivariate normal with correlation rho: delta-method SE is (1 - rho^2)/sqrt(N).
TEST(Correlation, StandardErrorForGaussianPairs) {
    constexpr int kN = 200000;
    constexpr double kRho = 0.5;
    RngStream s(5, 5);
    std::vector<double> x(kN);
    std::vector<double> y(kN);
    for (int i = 0; i < kN; ++i) {
        const Complex z = complex_normal(s) * std::numbers::sqrt2;
        x[i] = z.real();
        y[i] = kRho * z.real() + std::sqrt(1.0 - kRho * kRho) * z.imag();
    }
    const auto c = pearson_correlation(x, y);
    const double se = (1.0 - kRho * kRho) / std::sqrt(kN);
    EXPECT_NEAR(c.std_error, se, 0.05 * se);
    EXPECT_NEAR(c.r, kRho, 5.0 * se);
}

TEST(Experiments, CorrelationShuffledIsZero) {
    McPlan plan{.seed = 3, .streams = 2, .workers = 1};
    const auto r = correlation_experiment(4, 50000, plan, true);
    EXPECT_EQ(r.reference, Complex(0.0));
    EXPECT_TRUE(r.within()) << r.z_score;
}

TEST(Experiments, NamedStatistics) {
    McPlan plan{.seed = 4, .streams = 2, .workers = 1};
    using E = SamplerSpec::Ensemble;
    const auto trace = mc_estimate(SamplerSpec{E::haar_qr, 5}, "trace", 20000, plan, Complex(0.0));
    EXPECT_TRUE(trace.within());
    const auto frob = mc_estimate(SamplerSpec{E::truncation, 6, 2, false}, "frobenius_sq", 20000,
                                  plan, Complex(4.0 / 6.0));
    EXPECT_TRUE(frob.within());
    const auto one = mc_estimate(SamplerSpec{E::ginibre, 3}, "constant", 10, plan, Complex(1.0));
    EXPECT_EQ(one.z_score, 0.0);
    EXPECT_THROW(named_statistic("nope"), std::invalid_argument);
    EXPECT_THROW(mc_estimate("x", 1, 1, plan, [](RngStream&) { return Complex(); }),
                 std::invalid_argument);
}

TEST(Experiments, WorkerExceptionsPropagate) {
    McPlan plan{.seed = 0, .streams = 4, .workers = 3};
    EXPECT_THROW(for_each_stream(plan,
                                 [](int s) {
                                     if (s == 2) {
                                         throw std::runtime_error("boom");
                                     }
                                 }),
                 std::runtime_error);
    plan.streams = 0;
    EXPECT_THROW(for_each_stream(plan, [](int) {}), std::invalid_argument);
}

TEST(Experiments, ConvergenceVerdictRules) {
    auto row = [](int n, double est, double se) {
        EstimateReport r;
        r.n = n;
        r.estimate = est;
        r.reference = 1.0;
        r.std_error = se;
        r.std_error_re = se;
        r.z_score = std::abs(est - 1.0) / se;
        return r;
    };
    EXPECT_TRUE(convergence_verdict({row(8, 1.5, 0.01), row(16, 1.2, 0.01), row(32, 1.03, 0.01)})
                    .passed());
    // one small inversion is tolerated
    EXPECT_TRUE(convergence_verdict({row(8, 1.01, 0.01), row(16, 1.02, 0.01), row(32, 1.0, 0.01)})
                    .passed());
    // a large inversion is not
    EXPECT_FALSE(convergence_verdict({row(8, 1.0, 0.01), row(16, 1.2, 0.01), row(32, 1.0, 0.01)})
                     .passed());
    // terminal estimate too far out
    EXPECT_FALSE(convergence_verdict({row(8, 1.5, 0.01), row(16, 1.3, 0.01), row(32, 1.1, 0.01)})
                     .passed());
}

}  // namespace
