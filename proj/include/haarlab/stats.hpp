// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "densities.hpp"
#include "ensembles.hpp"
#include "moments.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace haarlab {

//---------------------------------------------------------------------------//
// Parallel Monte Carlo plumbing
//---------------------------------------------------------------------------//

/**
 * How a Monte Carlo run is split.
 *
 * Samples are partitioned over `streams` RNG streams in contiguous blocks;
 * `workers` threads process streams in any order, and per-stream results are
 * reduced in stream order. Results therefore depend on (seed, streams, tag)
 * but never on `workers`.
 */
struct McPlan {
    std::uint64_t seed = 0;
    int streams = 1;
    int workers = 1;
    /// Distinguishes independent experiments sharing a seed.
    std::uint32_t tag = 0;

    RngStream stream(int s) const {
        return RngStream(seed, (std::uint64_t{tag} << 32) | static_cast<std::uint32_t>(s));
    }
    McPlan with_tag(std::uint32_t t) const {
        McPlan p = *this;
        p.tag = t;
        return p;
    }
};

/// Number of samples assigned to stream s.
inline std::int64_t stream_share(std::int64_t total, int streams, int s) {
    const std::int64_t base = total / streams;
    return base + (s < total % streams ? 1 : 0);
}

/// Run body(s) for every stream index, spread over plan.workers threads.
template<class Body>
void for_each_stream(McPlan const& plan, Body&& body) {
    if (plan.streams < 1) {
        throw std::invalid_argument("McPlan: streams must be positive");
    }
    const int workers = std::clamp(plan.workers, 1, plan.streams);
    if (workers == 1) {
        for (int s = 0; s < plan.streams; ++s) {
            body(s);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(plan.streams));
    auto work = [&] {
        for (int s = next++; s < plan.streams; s = next++) {
            try {
                body(s);
            } catch (...) {
                errors[static_cast<std::size_t>(s)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Running mean and variance of a complex statistic, componentwise
/// (Welford update, Chan merge).
class Accumulator {
  public:
    void add(Complex x) noexcept {
        ++count_;
        const double n = static_cast<double>(count_);
        const double dr = x.real() - mean_re_;
        const double di = x.imag() - mean_im_;
        mean_re_ += dr / n;
        mean_im_ += di / n;
        m2_re_ += dr * (x.real() - mean_re_);
        m2_im_ += di * (x.imag() - mean_im_);
    }

    void merge(Accumulator const& other) noexcept {
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double n = na + nb;
        const double dr = other.mean_re_ - mean_re_;
        const double di = other.mean_im_ - mean_im_;
        mean_re_ += dr * (nb / n);
        mean_im_ += di * (nb / n);
        m2_re_ += other.m2_re_ + dr * dr * (na * nb / n);
        m2_im_ += other.m2_im_ + di * di * (na * nb / n);
        count_ += other.count_;
    }

    std::int64_t count() const noexcept { return count_; }
    Complex mean() const noexcept { return {mean_re_, mean_im_}; }
    double variance_re() const noexcept { return count_ > 1 ? m2_re_ / (count_ - 1) : 0.0; }
    double variance_im() const noexcept { return count_ > 1 ? m2_im_ / (count_ - 1) : 0.0; }
    double std_error_re() const noexcept {
        return count_ > 0 ? std::sqrt(variance_re() / count_) : 0.0;
    }
    double std_error_im() const noexcept {
        return count_ > 0 ? std::sqrt(variance_im() / count_) : 0.0;
    }

  private:
    std::int64_t count_ = 0;
    double mean_re_ = 0.0;
    double mean_im_ = 0.0;
    double m2_re_ = 0.0;
    double m2_im_ = 0.0;
};

/**
 * Accumulate `num_stats` complex statistics over `samples` draws.
 *
 * draw(stream, out) fills out[0..num_stats) for one independent draw.
 */
template<class Draw>
std::vector<Accumulator> mc_accumulate(McPlan const& plan, std::int64_t samples,
                                       std::size_t num_stats, Draw&& draw) {
    std::vector<std::vector<Accumulator>> partial(static_cast<std::size_t>(plan.streams));
    for_each_stream(plan, [&](int s) {
        RngStream stream = plan.stream(s);
        std::vector<Accumulator> acc(num_stats);
        std::vector<Complex> values(num_stats);
        const std::int64_t count = stream_share(samples, plan.streams, s);
        for (std::int64_t i = 0; i < count; ++i) {
            draw(stream, std::span<Complex>(values));
            for (std::size_t k = 0; k < num_stats; ++k) {
                acc[k].add(values[k]);
            }
        }
        partial[static_cast<std::size_t>(s)] = std::move(acc);
    });
    std::vector<Accumulator> total(num_stats);
    for (auto const& p : partial) {
        for (std::size_t k = 0; k < num_stats; ++k) {
            total[k].merge(p[k]);
        }
    }
    return total;
}

/// Collect one value per draw, concatenated in stream order.
template<class T, class Draw>
std::vector<T> mc_collect(McPlan const& plan, std::int64_t samples, Draw&& draw) {
    std::vector<std::vector<T>> partial(static_cast<std::size_t>(plan.streams));
    for_each_stream(plan, [&](int s) {
        RngStream stream = plan.stream(s);
        const std::int64_t count = stream_share(samples, plan.streams, s);
        auto& out = partial[static_cast<std::size_t>(s)];
        out.reserve(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) {
            out.push_back(draw(stream));
        }
    });
    std::vector<T> all;
    all.reserve(static_cast<std::size_t>(samples));
    for (auto& p : partial) {
        std::move(p.begin(), p.end(), std::back_inserter(all));
    }
    return all;
}

//---------------------------------------------------------------------------//
// Reports
//---------------------------------------------------------------------------//

enum class ReferenceKind { exact, limit, none };

inline char const* to_string(ReferenceKind k) {
    switch (k) {
        case ReferenceKind::exact: return "exact";
        case ReferenceKind::limit: return "limit";
        case ReferenceKind::none: return "none";
    }
    return "unknown";
}

/// Standard acceptance band, in standard errors.
inline constexpr double kAcceptanceSigmas = 5.0;

struct EstimateReport {
    std::string statistic;
    int n = 0;
    std::int64_t samples = 0;
    Complex estimate;
    /// SE of the complex mean, hypot(std_error_re, std_error_im).
    double std_error = 0.0;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    Complex reference;
    ReferenceKind reference_kind = ReferenceKind::none;
    /// Larger of the componentwise |deviation| / SE.
    double z_score = 0.0;

    bool within(double sigmas = kAcceptanceSigmas) const { return z_score <= sigmas; }
    double deviation() const { return std::abs(estimate - reference); }
};

namespace detail {

// Deviations at rounding level are not statistical evidence; they matter
// when a statistic is (numerically) constant and its SE collapses to 0.
inline double component_z(double deviation, double se, double scale) {
    const double floor = 1e-12 * std::max(1.0, scale);
    deviation = std::abs(deviation);
    if (deviation <= floor) {
        return 0.0;
    }
    return se > 0.0 ? deviation / se : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline double z_score(Complex estimate, double se_re, double se_im, Complex reference) {
    const double scale = std::max(std::abs(reference), std::abs(estimate));
    const Complex d = estimate - reference;
    return std::max(detail::component_z(d.real(), se_re, scale),
                    detail::component_z(d.imag(), se_im, scale));
}

inline EstimateReport make_report(std::string statistic, int n, Accumulator const& acc,
                                  Complex reference, ReferenceKind kind) {
    EstimateReport r;
    r.statistic = std::move(statistic);
    r.n = n;
    r.samples = acc.count();
    r.estimate = acc.mean();
    r.std_error_re = acc.std_error_re();
    r.std_error_im = acc.std_error_im();
    r.std_error = std::hypot(r.std_error_re, r.std_error_im);
    r.reference = reference;
    r.reference_kind = kind;
    r.z_score = kind == ReferenceKind::none
                    ? 0.0
                    : z_score(r.estimate, r.std_error_re, r.std_error_im, reference);
    return r;
}

inline nlohmann::json complex_to_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline nlohmann::json to_json(EstimateReport const& r) {
    return {{"statistic", r.statistic},
            {"n", r.n},
            {"N", r.samples},
            {"estimate", complex_to_json(r.estimate)},
            {"std_error", r.std_error},
            {"std_error_re", r.std_error_re},
            {"std_error_im", r.std_error_im},
            {"reference", complex_to_json(r.reference)},
            {"reference_kind", to_string(r.reference_kind)},
            {"z_score", r.z_score}};
}

inline EstimateReport report_from_json(nlohmann::json const& j) {
    EstimateReport r;
    r.statistic = j.at("statistic").get<std::string>();
    r.n = j.at("n").get<int>();
    r.samples = j.at("N").get<std::int64_t>();
    r.estimate = {j.at("estimate").at("re").get<double>(), j.at("estimate").at("im").get<double>()};
    r.std_error = j.at("std_error").get<double>();
    r.std_error_re = j.at("std_error_re").get<double>();
    r.std_error_im = j.at("std_error_im").get<double>();
    r.reference = {j.at("reference").at("re").get<double>(),
                   j.at("reference").at("im").get<double>()};
    const auto kind = j.at("reference_kind").get<std::string>();
    r.reference_kind = kind == "exact"   ? ReferenceKind::exact
                       : kind == "limit" ? ReferenceKind::limit
                                         : ReferenceKind::none;
    r.z_score = j.at("z_score").is_null() ? std::numeric_limits<double>::infinity()
                                          : j.at("z_score").get<double>();
    return r;
}

inline void write_reports_csv(std::ostream& os, std::vector<EstimateReport> const& rows) {
    const auto precision = os.precision();
    os << "statistic,n,N,estimate_re,estimate_im,std_error,reference_re,reference_im,"
          "reference_kind,z_score\n"
       << std::setprecision(17);
    for (auto const& r : rows) {
        os << '"' << r.statistic << "\"," << r.n << ',' << r.samples << ','
           << r.estimate.real() << ',' << r.estimate.imag() << ',' << r.std_error << ','
           << r.reference.real() << ',' << r.reference.imag() << ','
           << to_string(r.reference_kind) << ',' << r.z_score << '\n';
    }
    os.precision(precision);
}

//---------------------------------------------------------------------------//
// Generic estimation
//---------------------------------------------------------------------------//

/// Mean and SE of draw(stream) over `samples` independent draws.
template<class Draw>
EstimateReport mc_estimate(std::string statistic, int n, std::int64_t samples,
                           McPlan const& plan, Draw&& draw,
                           std::optional<Complex> reference = std::nullopt,
                           ReferenceKind kind = ReferenceKind::exact) {
    if (samples < 2) {
        throw std::invalid_argument("mc_estimate: need at least 2 samples");
    }
    auto acc = mc_accumulate(plan, samples, 1, [&](RngStream& s, std::span<Complex> out) {
        out[0] = draw(s);
    });
    return make_report(std::move(statistic), n, acc[0], reference.value_or(Complex{}),
                       reference ? kind : ReferenceKind::none);
}

/// Which matrix a named statistic is evaluated on.
struct SamplerSpec {
    enum class Ensemble { haar_gram_schmidt, haar_qr, ginibre, truncation };
    Ensemble ensemble = Ensemble::haar_gram_schmidt;
    int n = 2;
    int m = 1;  // truncation only
    bool scaled = false;

    ComplexMatrix draw(RngStream& s) const {
        switch (ensemble) {
            case Ensemble::haar_gram_schmidt: return haar_unitary(s, n);
            case Ensemble::haar_qr: return haar_unitary_qr(s, n);
            case Ensemble::ginibre: return ginibre_matrix(s, n, n);
            case Ensemble::truncation: return sample_truncation(s, TruncationSpec{n, m, scaled});
        }
        throw std::logic_error("SamplerSpec: unknown ensemble");
    }
};

/// Statistics addressable by name from the command line.
inline std::vector<std::string> statistic_names() {
    return {"constant", "trace", "abs_trace_sq", "entry11", "entry11_sq", "entry11_sq_scaled",
            "frobenius_sq"};
}

inline std::function<Complex(ComplexMatrix const&)> named_statistic(std::string const& name) {
    if (name == "constant") {
        return [](ComplexMatrix const&) { return Complex(1.0); };
    }
    if (name == "trace") {
        return [](ComplexMatrix const& m) { return m.trace(); };
    }
    if (name == "abs_trace_sq") {
        return [](ComplexMatrix const& m) { return Complex(std::norm(m.trace())); };
    }
    if (name == "entry11") {
        return [](ComplexMatrix const& m) { return m(0, 0); };
    }
    if (name == "entry11_sq") {
        return [](ComplexMatrix const& m) { return Complex(std::norm(m(0, 0))); };
    }
    if (name == "entry11_sq_scaled") {
        return [](ComplexMatrix const& m) {
            return Complex(static_cast<double>(m.rows()) * std::norm(m(0, 0)));
        };
    }
    if (name == "frobenius_sq") {
        return [](ComplexMatrix const& m) { return Complex(m.squaredNorm()); };
    }
    throw std::invalid_argument("unknown statistic: " + name);
}

inline EstimateReport mc_estimate(SamplerSpec const& sampler, std::string const& statistic,
                                  std::int64_t samples, McPlan const& plan,
                                  std::optional<Complex> reference = std::nullopt,
                                  ReferenceKind kind = ReferenceKind::exact) {
    auto f = named_statistic(statistic);
    return mc_estimate(statistic, sampler.n, samples, plan,
                       [&](RngStream& s) { return f(sampler.draw(s)); }, reference, kind);
}

//---------------------------------------------------------------------------//
// Kolmogorov-Smirnov
//---------------------------------------------------------------------------//

/// sup_x |F_N(x) - F(x)| for the empirical CDF F_N of the samples.
template<class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
    if (samples.empty()) {
        throw std::invalid_argument("ks_statistic: empty sample");
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// sup_x |F_a(x) - F_b(x)| between two empirical CDFs.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic coefficient c(alpha) = sqrt(-ln(alpha/2)/2); 1.63 at alpha = 0.01.
inline double ks_coefficient(double alpha) {
    if (alpha == 0.01) {
        return 1.63;
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ks_coefficient: alpha outside (0, 1)");
    }
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

inline double ks_critical_value(std::int64_t n, double alpha = 0.01) {
    return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

inline double ks_two_sample_critical_value(std::int64_t n1, std::int64_t n2, double alpha = 0.01) {
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    return ks_coefficient(alpha) * std::sqrt((a + b) / (a * b));
}

//---------------------------------------------------------------------------//
// Correlation of diagonal entries
//---------------------------------------------------------------------------//

struct Correlation {
    double r = 0.0;
    /// Delta-method SE, sd of the influence function over sqrt(N).
    double std_error = 0.0;
};

/**
 * Pearson correlation with SE from the influence function
 * x~ y~ - r (x~^2 + y~^2) / 2 of standardized observations.
 */
inline Correlation pearson_correlation(std::span<double const> x, std::span<double const> y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw std::invalid_argument("pearson_correlation: need matched samples, N >= 3");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0 && syy > 0.0)) {
        throw std::domain_error("pearson_correlation: degenerate variance");
    }
    Correlation c;
    c.r = sxy / std::sqrt(sxx * syy);
    const double sdx = std::sqrt(sxx / n);
    const double sdy = std::sqrt(syy / n);
    Accumulator influence;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - mx) / sdx;
        const double v = (y[i] - my) / sdy;
        influence.add(u * v - 0.5 * c.r * (u * u + v * v));
    }
    c.std_error = influence.std_error_re();
    return c;
}

/**
 * Correlation of (|U_11|^2, |U_22|^2) across Haar samples, against
 * 1/(n-1)^2. With `shuffled`, |U_22|^2 of sample i+1 is paired with
 * |U_11|^2 of sample i, and the reference is 0.
 */
inline EstimateReport correlation_experiment(int n, std::int64_t samples, McPlan const& plan,
                                             bool shuffled = false) {
    if (n < 2) {
        throw std::invalid_argument("correlation_experiment: need n >= 2");
    }
    if (samples < 3) {
        throw std::invalid_argument("correlation_experiment: need N >= 3");
    }
    struct Pair {
        double x;
        double y;
    };
    auto pairs = mc_collect<Pair>(plan, samples, [n](RngStream& s) {
        const ComplexMatrix q = haar_isometry(s, n, 2);
        return Pair{std::norm(q(0, 0)), std::norm(q(1, 1))};
    });
    std::vector<double> x(pairs.size());
    std::vector<double> y(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        x[i] = pairs[i].x;
        y[i] = shuffled ? pairs[(i + 1) % pairs.size()].y : pairs[i].y;
    }
    const Correlation c = pearson_correlation(x, y);
    EstimateReport r;
    r.statistic = shuffled ? "corr(|U11|^2,|U22|^2) shuffled" : "corr(|U11|^2,|U22|^2)";
    r.n = n;
    r.samples = samples;
    r.estimate = c.r;
    r.std_error = r.std_error_re = c.std_error;
    r.reference = shuffled ? 0.0 : 1.0 / ((n - 1.0) * (n - 1.0));
    r.reference_kind = ReferenceKind::exact;
    r.z_score = z_score(r.estimate, r.std_error_re, 0.0, r.reference);
    return r;
}

//---------------------------------------------------------------------------//
// Entry moments
//---------------------------------------------------------------------------//

/// E|U_11|^{2k} for k = 1..k_max against k! (n-1)! / (n+k-1)!.
inline std::vector<EstimateReport> entry_moment_experiment(int n, int k_max,
                                                           std::int64_t samples,
                                                           McPlan const& plan) {
    if (n < 1 || k_max < 1) {
        throw std::invalid_argument("entry_moment_experiment: need n >= 1, k_max >= 1");
    }
    if (samples < 2) {
        throw std::invalid_argument("entry_moment_experiment: need N >= 2");
    }
    auto acc = mc_accumulate(plan, samples, static_cast<std::size_t>(k_max),
                             [n, k_max](RngStream& s, std::span<Complex> out) {
                                 const ComplexMatrix q = haar_isometry(s, n, 1);
                                 const double a = std::norm(q(0, 0));
                                 double p = 1.0;
                                 for (int k = 0; k < k_max; ++k) {
                                     p *= a;
                                     out[static_cast<std::size_t>(k)] = p;
                                 }
                             });
    std::vector<EstimateReport> out;
    for (int k = 1; k <= k_max; ++k) {
        out.push_back(make_report("E|U11|^" + std::to_string(2 * k), n,
                                  acc[static_cast<std::size_t>(k - 1)],
                                  entry_abs_moment(n, k).to_double(), ReferenceKind::exact));
    }
    return out;
}

/// KS distance of |sqrt(n) U_11|^2 against 1 - (1 - x/n)^{n-1}.
struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;
    std::int64_t samples = 0;
    bool passed() const { return statistic < critical; }
};

inline nlohmann::json to_json(KsResult const& k) {
    return {{"ks", k.statistic}, {"critical", k.critical}, {"N", k.samples},
            {"passed", k.passed()}};
}

inline KsResult entry_law_experiment(int n, std::int64_t samples, McPlan const& plan) {
    if (n < 2) {
        throw std::invalid_argument("entry_law_experiment: need n >= 2");
    }
    auto x = mc_collect<double>(plan, samples, [n](RngStream& s) {
        const ComplexMatrix q = haar_isometry(s, n, 1);
        return std::min(static_cast<double>(n), n * std::norm(q(0, 0)));
    });
    KsResult r;
    r.samples = samples;
    r.statistic = ks_statistic(std::move(x), [n](double v) { return entry_radial_cdf(n, v); });
    r.critical = ks_critical_value(samples);
    return r;
}

//---------------------------------------------------------------------------//
// Traces of powers
//---------------------------------------------------------------------------//

struct TraceExperimentConfig {
    std::vector<int> sizes{8, 16, 32};
    std::vector<int> powers{1, 2, 3};
    int k_max = 2;
    /// explicit (k, l) pairs; when non-empty, replaces powers x 1..k_max
    std::vector<std::pair<int, int>> moments;
    std::vector<LimitMomentQuery> mixed;
    std::int64_t samples = 200000;
    McPlan plan;
    HaarMethod method = HaarMethod::gram_schmidt;
};

/**
 * Convergence of |estimate - reference| across increasing n.
 *
 * The deviation sequence may rise at most once, and that rise must stay
 * within 2 combined SEs; the last deviation must be within 5 SE.
 */
struct ConvergenceVerdict {
    std::string statistic;
    std::vector<int> sizes;
    std::vector<double> deviations;
    std::vector<double> std_errors;
    int inversions = 0;
    bool trend_ok = true;
    bool terminal_ok = true;
    bool passed() const { return trend_ok && terminal_ok; }
};

inline ConvergenceVerdict convergence_verdict(std::vector<EstimateReport> const& by_size) {
    ConvergenceVerdict v;
    if (by_size.empty()) {
        throw std::invalid_argument("convergence_verdict: empty sequence");
    }
    v.statistic = by_size.front().statistic;
    for (auto const& r : by_size) {
        v.sizes.push_back(r.n);
        v.deviations.push_back(r.deviation());
        v.std_errors.push_back(r.std_error);
    }
    for (std::size_t i = 1; i < by_size.size(); ++i) {
        const double rise = v.deviations[i] - v.deviations[i - 1];
        if (rise > 0.0) {
            ++v.inversions;
            const double band = 2.0 * std::hypot(v.std_errors[i], v.std_errors[i - 1]);
            if (rise > band) {
                v.trend_ok = false;
            }
        }
    }
    if (v.inversions > 1) {
        v.trend_ok = false;
    }
    v.terminal_ok = by_size.back().within(kAcceptanceSigmas);
    return v;
}

inline nlohmann::json to_json(ConvergenceVerdict const& v) {
    return {{"statistic", v.statistic},   {"sizes", v.sizes},
            {"deviations", v.deviations}, {"std_errors", v.std_errors},
            {"inversions", v.inversions}, {"trend_ok", v.trend_ok},
            {"terminal_ok", v.terminal_ok}, {"passed", v.passed()}};
}

inline std::string trace_moment_label(int k, int l) {
    return "E|Tr U^" + std::to_string(l) + "|^" + std::to_string(2 * k);
}

inline std::string mixed_moment_label(LimitMomentQuery const& q) {
    auto join = [](std::vector<int> const& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += (i ? "," : "") + std::to_string(v[i]);
        }
        return s;
    };
    return "mixed(a=" + join(q.a) + ";b=" + join(q.b) + ")";
}

struct TraceExperimentResult {
    std::vector<EstimateReport> rows;  // grouped by size, in config order
    std::vector<ConvergenceVerdict> convergence;
    std::vector<bool> mixed_within;    // terminal-size mixed moments within 5 SE

    bool passed() const {
        return std::all_of(convergence.begin(), convergence.end(),
                           [](auto const& v) { return v.passed(); })
               && std::all_of(mixed_within.begin(), mixed_within.end(),
                              [](bool b) { return b; });
    }
};

/**
 * Monte Carlo estimates of E|Tr U^l|^{2k} and mixed trace moments for each
 * size, referenced to their n -> infinity limits.
 */
inline TraceExperimentResult trace_experiment(TraceExperimentConfig const& cfg) {
    if (cfg.sizes.empty() || cfg.samples < 2) {
        throw std::invalid_argument("trace_experiment: need sizes and N >= 2");
    }
    std::vector<std::pair<int, int>> moments = cfg.moments;
    if (moments.empty()) {
        if (cfg.k_max < 1 || cfg.powers.empty()) {
            throw std::invalid_argument("trace_experiment: need powers and k_max >= 1");
        }
        for (int l : cfg.powers) {
            for (int k = 1; k <= cfg.k_max; ++k) {
                moments.emplace_back(k, l);
            }
        }
    }
    int max_power = 1;
    for (auto [k, l] : moments) {
        if (k < 1 || l < 1) {
            throw std::invalid_argument("trace_experiment: need k, l >= 1");
        }
        max_power = std::max(max_power, l);
    }
    for (auto const& q : cfg.mixed) {
        q.validate();
        max_power = std::max(max_power, q.max_power());
    }
    const std::size_t num_stats = moments.size() + cfg.mixed.size();

    TraceExperimentResult result;
    std::vector<std::vector<EstimateReport>> by_stat(moments.size());
    for (std::size_t idx = 0; idx < cfg.sizes.size(); ++idx) {
        const int n = cfg.sizes[idx];
        if (n < 1) {
            throw std::invalid_argument("trace_experiment: sizes must be positive");
        }
        const McPlan plan = cfg.plan.with_tag(cfg.plan.tag + static_cast<std::uint32_t>(idx));
        auto acc = mc_accumulate(plan, cfg.samples, num_stats,
                                 [&](RngStream& s, std::span<Complex> out) {
                                     const ComplexMatrix u = sample_haar(s, n, cfg.method);
                                     const auto traces = traces_of_powers(u, max_power);
                                     std::size_t j = 0;
                                     for (auto [k, l] : moments) {
                                         const double a = std::norm(traces[static_cast<std::size_t>(l - 1)]);
                                         out[j++] = std::pow(a, k);
                                     }
                                     for (auto const& q : cfg.mixed) {
                                         out[j++] = evaluate_trace_monomial(traces, q);
                                     }
                                 });
        for (std::size_t j = 0; j < moments.size(); ++j) {
            auto [k, l] = moments[j];
            auto rep = make_report(trace_moment_label(k, l), n, acc[j],
                                   static_cast<double>(limit_trace_moment(k, l)),
                                   ReferenceKind::limit);
            by_stat[j].push_back(rep);
            result.rows.push_back(std::move(rep));
        }
        for (std::size_t q = 0; q < cfg.mixed.size(); ++q) {
            auto rep = make_report(mixed_moment_label(cfg.mixed[q]), n,
                                   acc[moments.size() + q],
                                   static_cast<double>(limit_mixed_moment(cfg.mixed[q])),
                                   ReferenceKind::limit);
            if (idx + 1 == cfg.sizes.size()) {
                result.mixed_within.push_back(rep.within());
            }
            result.rows.push_back(std::move(rep));
        }
    }
    for (auto const& seq : by_stat) {
        result.convergence.push_back(convergence_verdict(seq));
    }
    return result;
}

//---------------------------------------------------------------------------//
// Powers of eigenvalues
//---------------------------------------------------------------------------//

struct EigenpowerReport {
    int n = 0;
    int m = 0;
    std::int64_t samples = 0;
    bool hypothesis_holds = false;  // m > n
    KsResult pooled;
    std::vector<EstimateReport> cross_moments;  // E e^{i(alpha_j - alpha_k)}, j < k

    bool cross_within() const {
        return std::all_of(cross_moments.begin(), cross_moments.end(),
                           [](auto const& r) { return r.within(); });
    }
    bool passed() const { return pooled.passed() && cross_within(); }
};

/**
 * Pooled angles of lambda_j^m over Haar samples, tested for uniformity, and
 * pairwise circular cross-moments tested against 0. Eigenvalue labels are
 * uniformly permuted per sample so the labeled vector is exchangeable.
 *
 * m <= n is rejected unless allow_small_power is set; in that case the
 * report is computed but the hypothesis flag is false.
 */
inline EigenpowerReport eigenpower_experiment(int n, int m, std::int64_t samples,
                                              McPlan const& plan,
                                              bool allow_small_power = false) {
    if (n < 1 || m < 1 || samples < 2) {
        throw std::invalid_argument("eigenpower_experiment: need n, m >= 1, N >= 2");
    }
    if (m <= n && !allow_small_power) {
        throw std::invalid_argument("eigenpower_experiment: independence needs m > n");
    }
    auto angle_sets = mc_collect<std::vector<double>>(plan, samples, [n, m](RngStream& s) {
        const ComplexMatrix u = haar_unitary(s, n);
        auto angles = eigenangle_powers(u, m);
        for (std::size_t i = angles.size(); i > 1; --i) {
            std::swap(angles[i - 1], angles[s.uniform_index(i)]);
        }
        return angles;
    });
    EigenpowerReport rep;
    rep.n = n;
    rep.m = m;
    rep.samples = samples;
    rep.hypothesis_holds = m > n;

    std::vector<double> pooled;
    pooled.reserve(angle_sets.size() * static_cast<std::size_t>(n));
    for (auto const& a : angle_sets) {
        pooled.insert(pooled.end(), a.begin(), a.end());
    }
    rep.pooled.samples = static_cast<std::int64_t>(pooled.size());
    rep.pooled.critical = ks_critical_value(rep.pooled.samples);
    rep.pooled.statistic = ks_statistic(
        std::move(pooled), [](double x) { return x / (2.0 * std::numbers::pi); });

    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            Accumulator acc;
            for (auto const& a : angle_sets) {
                acc.add(std::polar(1.0, a[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(k)]));
            }
            rep.cross_moments.push_back(make_report(
                "E exp(i(a" + std::to_string(j + 1) + "-a" + std::to_string(k + 1) + "))", n, acc,
                0.0, ReferenceKind::exact));
        }
    }
    return rep;
}

inline nlohmann::json to_json(EigenpowerReport const& r) {
    nlohmann::json cross = nlohmann::json::array();
    for (auto const& c : r.cross_moments) {
        cross.push_back(to_json(c));
    }
    return {{"n", r.n},
            {"m", r.m},
            {"N", r.samples},
            {"hypothesis_holds", r.hypothesis_holds},
            {"pooled_ks", to_json(r.pooled)},
            {"cross_moments", std::move(cross)},
            {"cross_within", r.cross_within()},
            {"passed", r.passed()}};
}

//---------------------------------------------------------------------------//
// Truncations
//---------------------------------------------------------------------------//

struct TruncationReport {
    TruncationSpec spec;
    std::int64_t samples = 0;
    /// m = 1 only: |U_11| (unscaled units) against 1 - (1 - r^2)^{n-1}
    std::optional<KsResult> exact_law;
    /// one uniformly chosen eigenvalue radius per sample, in scaled units,
    /// against the same statistic of m x m Ginibre matrices (variance 1/m)
    KsResult ginibre_law;
    std::vector<EstimateReport> moments;

    bool moments_within() const {
        return std::all_of(moments.begin(), moments.end(), [](auto const& r) { return r.within(); });
    }
    bool passed() const { return moments_within() && (!exact_law || exact_law->passed()); }
};

inline TruncationReport truncation_experiment(int n, int m, std::int64_t samples, bool scaled,
                                              McPlan const& plan) {
    const TruncationSpec spec{n, m, scaled};
    spec.validate();
    if (samples < 2) {
        throw std::invalid_argument("truncation_experiment: need N >= 2");
    }
    const double to_scaled = std::sqrt(static_cast<double>(n) / m) / spec.scale();

    struct Draw {
        double radius;  // scaled units
        Complex frobenius;
        Complex abs_trace_sq;
    };
    auto draws = mc_collect<Draw>(plan, samples, [&](RngStream& s) {
        const ComplexMatrix t = sample_truncation(s, spec);
        const Spectrum ev = eigenvalues(t);
        const auto pick = s.uniform_index(static_cast<std::uint64_t>(m));
        return Draw{std::abs(ev.values[pick]) * to_scaled, t.squaredNorm(),
                    std::norm(t.trace())};
    });
    const McPlan ginibre_plan = plan.with_tag(plan.tag ^ 0x6a09e667u);
    auto ginibre_radii = mc_collect<double>(ginibre_plan, samples, [m](RngStream& s) {
        const Spectrum ev = eigenvalues(sample_ginibre_limit(s, m));
        return std::abs(ev.values[s.uniform_index(static_cast<std::uint64_t>(m))]);
    });

    TruncationReport rep;
    rep.spec = spec;
    rep.samples = samples;
    std::vector<double> radii;
    radii.reserve(draws.size());
    Accumulator frob;
    Accumulator tr2;
    for (auto const& d : draws) {
        radii.push_back(d.radius);
        frob.add(d.frobenius);
        tr2.add(d.abs_trace_sq);
    }
    if (m == 1) {
        std::vector<double> unscaled(radii.size());
        const double back = std::sqrt(1.0 / n);
        std::transform(radii.begin(), radii.end(), unscaled.begin(),
                       [back](double r) { return r * back; });
        KsResult exact;
        exact.samples = samples;
        exact.critical = ks_critical_value(samples);
        exact.statistic =
            ks_statistic(std::move(unscaled), [n](double r) { return entry_modulus_cdf(n, r); });
        rep.exact_law = exact;
    }
    rep.ginibre_law.samples = samples;
    rep.ginibre_law.critical = ks_two_sample_critical_value(samples, samples);
    rep.ginibre_law.statistic = ks_two_sample(std::move(radii), std::move(ginibre_radii));

    // E Tr(T T^*) = m^2/n and E|Tr T|^2 = m/n before scaling by n/m.
    const double s2 = spec.scale() * spec.scale();
    rep.moments.push_back(make_report("E Tr(T T^*)", n, frob,
                                      s2 * m * m / static_cast<double>(n), ReferenceKind::exact));
    rep.moments.push_back(make_report("E|Tr T|^2", n, tr2, s2 * m / static_cast<double>(n),
                                      ReferenceKind::exact));
    return rep;
}

inline nlohmann::json to_json(TruncationReport const& r) {
    nlohmann::json moments = nlohmann::json::array();
    for (auto const& m : r.moments) {
        moments.push_back(to_json(m));
    }
    nlohmann::json j = {{"n", r.spec.n},
                        {"m", r.spec.m},
                        {"scaled", r.spec.scaled},
                        {"N", r.samples},
                        {"ginibre_two_sample_ks", to_json(r.ginibre_law)},
                        {"moments", std::move(moments)},
                        {"passed", r.passed()}};
    if (r.exact_law) {
        j["exact_law_ks"] = to_json(*r.exact_law);
    }
    return j;
}

}  // namespace haarlab
