// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "densities.hpp"
#include "ensembles.hpp"
#include "moments.hpp"
#include "quadrature.hpp"
#include "stats.hpp"

namespace haarlab {

struct VerifyOptions {
    std::uint64_t seed = 0;
    int streams = 8;
    int workers = 1;
    /// "full" uses the reference sample counts; "quick" caps them at 20000.
    std::string suite = "full";
    /// Replaces every Monte Carlo sample count when set.
    std::optional<std::int64_t> samples;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    nlohmann::json details;
};

namespace detail {

inline std::int64_t suite_samples(VerifyOptions const& opt, std::int64_t reference) {
    if (opt.samples) {
        return *opt.samples;
    }
    return opt.suite == "quick" ? std::min<std::int64_t>(reference, 20000) : reference;
}

inline McPlan suite_plan(VerifyOptions const& opt, std::uint32_t criterion) {
    McPlan plan;
    plan.seed = opt.seed;
    plan.streams = opt.streams;
    plan.workers = opt.workers;
    plan.tag = criterion << 8;
    return plan;
}

inline nlohmann::json reports_json(std::vector<EstimateReport> const& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (auto const& r : rows) {
        out.push_back(to_json(r));
    }
    return out;
}

}  // namespace detail

/// Sampled unitaries satisfy max|U^*U - I|, max|UU^* - I| <= 1e-12.
inline CriterionResult verify_unitarity(VerifyOptions const& opt) {
    CriterionResult c{1, "unitarity", true, nlohmann::json::array()};
    for (int n : {4, 32, 256}) {
        for (auto method : {HaarMethod::gram_schmidt, HaarMethod::householder_qr}) {
            RngStream stream(opt.seed, (std::uint64_t{1} << 40) | static_cast<std::uint64_t>(n));
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) {
                worst = std::max(worst, unitarity_defect(sample_haar(stream, n, method)));
            }
            const bool ok = worst <= kUnitarityTolerance;
            c.passed = c.passed && ok;
            c.details.push_back({{"n", n},
                                 {"method", method == HaarMethod::gram_schmidt ? "gram_schmidt"
                                                                               : "householder_qr"},
                                 {"samples", 100},
                                 {"max_defect", worst},
                                 {"passed", ok}});
        }
    }
    return c;
}

/// KS of |sqrt(n) U_11|^2 against 1 - (1 - x/n)^{n-1} at n = 16.
inline CriterionResult verify_entry_law(VerifyOptions const& opt) {
    const auto ks = entry_law_experiment(16, detail::suite_samples(opt, 100000),
                                         detail::suite_plan(opt, 2));
    return {2, "entry_law", ks.passed(), to_json(ks)};
}

/// E|U_11|^{2k}, k = 1..3, at n = 8 against k! 7!/(7+k)!, whose values are
/// cross-checked by quadrature of the entry density.
inline CriterionResult verify_entry_moments(VerifyOptions const& opt) {
    constexpr int n = 8;
    const auto reports = entry_moment_experiment(n, 3, detail::suite_samples(opt, 1000000),
                                                 detail::suite_plan(opt, 3));
    const auto rule = gauss_legendre(40);
    bool ok = true;
    nlohmann::json oracle = nlohmann::json::array();
    for (int k = 1; k <= 3; ++k) {
        const double quad = integrate(
            rule,
            [k](double r) {
                return 2.0 * (n - 1) * r * std::pow(1.0 - r * r, n - 2) * std::pow(r, 2 * k);
            },
            0.0, 1.0);
        const double exact = entry_abs_moment(n, k).to_double();
        const bool agree = std::abs(quad - exact) <= 1e-12;
        ok = ok && agree && reports[static_cast<std::size_t>(k - 1)].within();
        oracle.push_back({{"k", k}, {"formula", exact}, {"quadrature", quad}, {"agree", agree}});
    }
    return {3, "entry_moments", ok,
            {{"reports", detail::reports_json(reports)}, {"oracle", std::move(oracle)}}};
}

/// Pearson correlation of (|U_11|^2, |U_22|^2) at n = 4 against 1/9.
inline CriterionResult verify_correlation(VerifyOptions const& opt) {
    const auto r = correlation_experiment(4, detail::suite_samples(opt, 1000000),
                                          detail::suite_plan(opt, 4));
    return {4, "correlation", r.within(), to_json(r)};
}

/// Trace moments across n in {8, 16, 32} (criterion 5) and the mixed
/// moments at n = 32 (criterion 6) from one shared run.
inline std::vector<CriterionResult> verify_traces(VerifyOptions const& opt) {
    TraceExperimentConfig cfg;
    cfg.sizes = {8, 16, 32};
    cfg.moments = {{1, 1}, {2, 1}, {1, 2}, {1, 3}, {2, 2}};
    cfg.mixed = {LimitMomentQuery{{1, 1}, {1, 1}}, LimitMomentQuery{{2, 0}, {0, 1}}};
    cfg.samples = detail::suite_samples(opt, 200000);
    cfg.plan = detail::suite_plan(opt, 5);
    const auto res = trace_experiment(cfg);

    nlohmann::json verdicts = nlohmann::json::array();
    bool trend_ok = true;
    for (auto const& v : res.convergence) {
        trend_ok = trend_ok && v.passed();
        verdicts.push_back(to_json(v));
    }
    std::vector<EstimateReport> moment_rows;
    std::vector<EstimateReport> mixed_rows;
    for (auto const& r : res.rows) {
        if (r.statistic.rfind("mixed", 0) == 0) {
            if (r.n == 32) {
                mixed_rows.push_back(r);
            }
        } else {
            moment_rows.push_back(r);
        }
    }
    bool mixed_ok = !mixed_rows.empty();
    for (auto const& r : mixed_rows) {
        mixed_ok = mixed_ok && r.within();
    }
    return {
        {5, "trace_clt", trend_ok,
         {{"reports", detail::reports_json(moment_rows)}, {"convergence", std::move(verdicts)}}},
        {6, "trace_independence", mixed_ok, {{"reports", detail::reports_json(mixed_rows)}}}};
}

/// lambda^7 at n = 6: pooled KS against uniform and pairwise cross-moments.
inline CriterionResult verify_eigenpowers(VerifyOptions const& opt) {
    const auto rep = eigenpower_experiment(6, 7, detail::suite_samples(opt, 10000),
                                           detail::suite_plan(opt, 7));
    return {7, "eigenvalue_powers", rep.passed(), to_json(rep)};
}

/// MC integral of the (6, 2) truncated density over D^2, and
/// C_{[n,1]} = (n-1)/pi for n = 2..50.
inline CriterionResult verify_truncation_density(VerifyOptions const& opt) {
    constexpr std::int64_t kPoints = 2000000;
    const McPlan plan = detail::suite_plan(opt, 8);
    const auto rep = mc_estimate(
        "integral of truncated_jpdf(6,2) over D^2", 6, kPoints, plan,
        [](RngStream& s) {
            std::array<Complex, 2> z;
            for (auto& p : z) {
                const double r = std::sqrt(s.uniform());
                const double theta = 2.0 * std::numbers::pi * s.uniform();
                p = std::polar(r, theta);
            }
            const double area = std::numbers::pi * std::numbers::pi;
            return Complex(area * truncated_jpdf(6, 2, z).value);
        },
        Complex(1.0), ReferenceKind::exact);
    const double rel = std::abs(rep.estimate.real() - 1.0);
    const bool integral_ok = rel <= 0.01;
    bool constants_ok = true;
    for (int n = 2; n <= 50; ++n) {
        constants_ok = constants_ok && truncation_constant(n, 1) == (n - 1) / std::numbers::pi;
    }
    return {8, "truncation_density", integral_ok && constants_ok,
            {{"integral", to_json(rep)},
             {"relative_error", rel},
             {"tolerance", 0.01},
             {"constant_m1_exact", constants_ok}}};
}

/// Scaled truncations with m = 2 against direct Ginibre eigenvalues.
inline CriterionResult verify_ginibre_limit(VerifyOptions const& opt) {
    const auto samples = detail::suite_samples(opt, 10000);
    const McPlan plan = detail::suite_plan(opt, 9);
    const auto small = truncation_experiment(32, 2, samples, true, plan);
    const auto large = truncation_experiment(256, 2, samples, true, plan.with_tag(plan.tag + 1));
    const bool below = large.ginibre_law.passed();
    const bool decreasing = large.ginibre_law.statistic < small.ginibre_law.statistic;
    return {9, "ginibre_limit", below && decreasing,
            {{"n32", to_json(small)},
             {"n256", to_json(large)},
             {"n256_below_critical", below},
             {"distance_decreases", decreasing}}};
}

/// E|Tr U|^2 at n = 2: quadrature of the Weyl density against Monte Carlo.
inline CriterionResult verify_small_n_oracle(VerifyOptions const& opt) {
    const double quad = integrate_torus2(
                            [](double a, double b) {
                                const std::array<double, 2> th{a, b};
                                const double w = weyl_density(th, 2).value;
                                return std::norm(std::polar(1.0, a) + std::polar(1.0, b)) * w;
                            },
                            64)
                        / (4.0 * std::numbers::pi * std::numbers::pi);
    const auto rep = mc_estimate(SamplerSpec{SamplerSpec::Ensemble::haar_gram_schmidt, 2},
                                 "abs_trace_sq", detail::suite_samples(opt, 100000),
                                 detail::suite_plan(opt, 10), Complex(quad),
                                 ReferenceKind::exact);
    return {10, "small_n_oracle", rep.within(), {{"quadrature", quad}, {"report", to_json(rep)}}};
}

/// Same configuration, different worker counts, repeated: identical output.
inline CriterionResult verify_reproducibility(VerifyOptions const& opt) {
    auto run = [&](int workers) {
        TraceExperimentConfig cfg;
        cfg.sizes = {4, 8};
        cfg.moments = {{1, 1}, {1, 2}};
        cfg.mixed = {LimitMomentQuery{{1, 1}, {1, 1}}};
        cfg.samples = 20000;
        cfg.plan = detail::suite_plan(opt, 11);
        cfg.plan.workers = workers;
        const auto res = trace_experiment(cfg);
        return detail::reports_json(res.rows).dump();
    };
    const std::string first = run(1);
    const std::string again = run(1);
    const std::string threaded = run(std::max(2, opt.streams / 2));
    const bool ok = first == again && first == threaded;
    return {11, "reproducibility", ok,
            {{"repeat_identical", first == again}, {"worker_count_invariant", first == threaded}}};
}

inline std::vector<CriterionResult> run_acceptance_suite(VerifyOptions const& opt) {
    if (opt.suite != "full" && opt.suite != "quick") {
        throw std::invalid_argument("verify: suite must be 'full' or 'quick'");
    }
    std::vector<CriterionResult> out;
    out.push_back(verify_unitarity(opt));
    out.push_back(verify_entry_law(opt));
    out.push_back(verify_entry_moments(opt));
    out.push_back(verify_correlation(opt));
    for (auto& c : verify_traces(opt)) {
        out.push_back(std::move(c));
    }
    out.push_back(verify_eigenpowers(opt));
    out.push_back(verify_truncation_density(opt));
    out.push_back(verify_ginibre_limit(opt));
    out.push_back(verify_small_n_oracle(opt));
    out.push_back(verify_reproducibility(opt));
    return out;
}

inline nlohmann::json verify_report_json(VerifyOptions const& opt,
                                         std::vector<CriterionResult> const& results) {
    nlohmann::json criteria = nlohmann::json::array();
    bool all = true;
    for (auto const& c : results) {
        all = all && c.passed;
        criteria.push_back(
            {{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"details", c.details}});
    }
    nlohmann::json meta = {{"seed", opt.seed}, {"streams", opt.streams}, {"suite", opt.suite}};
    if (opt.samples) {
        meta["samples"] = *opt.samples;
    }
    return {{"metadata", std::move(meta)}, {"criteria", std::move(criteria)}, {"passed", all}};
}

}  // namespace haarlab
