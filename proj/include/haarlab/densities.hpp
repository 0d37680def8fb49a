// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"
#include "rng.hpp"

namespace haarlab {

/// Reference measure a density value is expressed against.
enum class Measure {
    per_dz,        ///< prod dz_i with dz = dtheta/2pi on the unit circle
    per_angle,     ///< prod dtheta_i on the unit circle
    per_lebesgue,  ///< area measure on the disc / complex plane, per point
};

inline char const* to_string(Measure m) {
    switch (m) {
        case Measure::per_dz: return "per_dz";
        case Measure::per_angle: return "per_angle";
        case Measure::per_lebesgue: return "per_lebesgue";
    }
    return "unknown";
}

struct DensityPoint {
    std::vector<Complex> points;
    double value = 0.0;
    Measure measure = Measure::per_lebesgue;
};

/// Re-express a circle density against another circle measure.
inline DensityPoint convert_measure(DensityPoint p, Measure target) {
    if (p.measure == target) {
        return p;
    }
    const bool circle_from = p.measure != Measure::per_lebesgue;
    const bool circle_to = target != Measure::per_lebesgue;
    if (!circle_from || !circle_to) {
        throw std::invalid_argument("convert_measure: circle and disc measures are not comparable");
    }
    const double factor = std::pow(2.0 * std::numbers::pi, static_cast<double>(p.points.size()));
    p.value = (target == Measure::per_angle) ? p.value / factor : p.value * factor;
    p.measure = target;
    return p;
}

namespace detail {

inline double log_abs_vandermonde_sq(std::span<Complex const> z) {
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = i + 1; j < z.size(); ++j) {
            acc += 2.0 * std::log(std::abs(z[i] - z[j]));
        }
    }
    return acc;
}

inline double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace detail

/// prod_{i<j} (z_i - z_j); 1 for fewer than two points.
inline Complex vandermonde(std::span<Complex const> z) {
    Complex v = 1.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = i + 1; j < z.size(); ++j) {
            v *= z[i] - z[j];
        }
    }
    return v;
}

//---------------------------------------------------------------------------//
/*!
 * Joint eigenvalue density of an n x n Haar unitary at z_i = e^{i theta_i}:
 * (1/n!) prod_{i<j} |z_i - z_j|^2 against prod dz_i.
 */
inline DensityPoint weyl_density(std::span<double const> angles, int n) {
    if (n < 1 || angles.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("weyl_density: need exactly n angles");
    }
    DensityPoint out;
    out.measure = Measure::per_dz;
    out.points.reserve(angles.size());
    for (double theta : angles) {
        out.points.push_back(std::polar(1.0, theta));
    }
    const double log_value =
        detail::log_abs_vandermonde_sq(out.points) - detail::log_factorial(n);
    out.value = std::exp(log_value);
    return out;
}

//---------------------------------------------------------------------------//
// Truncated Haar unitaries
//---------------------------------------------------------------------------//

namespace detail {

inline void check_truncation(int n, int m) {
    if (m < 1 || m >= n) {
        throw std::invalid_argument("truncation: need 1 <= m <= n - 1");
    }
}

// prod_{k=0}^{m-1} C(n-m+k-1, k) (n-m+k), exactly when it fits.
inline std::optional<Rational::Int> truncation_product_exact(int n, int m) {
    if (n > 170) {
        return std::nullopt;
    }
    try {
        Rational::Int p = 1;
        for (int k = 0; k < m; ++k) {
            p = Rational::checked_mul(p, binomial_exact(n - m + k - 1, k));
            p = Rational::checked_mul(p, n - m + k);
        }
        return p;
    } catch (std::overflow_error const&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// log C_{[n,m]}, the normalizing constant of the truncated density.
inline double log_truncation_constant(int n, int m) {
    detail::check_truncation(n, m);
    double log_p = 0.0;
    if (auto exact = detail::truncation_product_exact(n, m)) {
        log_p = std::log(static_cast<long double>(*exact));
    } else {
        // log C(n-m+k-1, k) = sum_{j=1}^k log((n-m-1+j)/j); lgamma differences
        // would cancel badly for large n
        for (int k = 0; k < m; ++k) {
            for (int j = 1; j <= k; ++j) {
                log_p += std::log(static_cast<double>(n - m - 1 + j) / j);
            }
            log_p += std::log(static_cast<double>(n - m + k));
        }
    }
    return log_p - m * std::log(std::numbers::pi) - detail::log_factorial(m);
}

/**
 * C_{[n,m]} with
 * 1/C = pi^m m! prod_{k=0}^{m-1} 1 / (C(n-m+k-1, k) (n-m+k)).
 *
 * For m = 1 this is (n-1)/pi.
 */
inline double truncation_constant(int n, int m) {
    detail::check_truncation(n, m);
    if (auto exact = detail::truncation_product_exact(n, m)) {
        const double m_factorial = std::exp(detail::log_factorial(m));
        const double denom = std::pow(std::numbers::pi, m)
                             * (m <= 20 ? static_cast<double>(factorial_exact(m)) : m_factorial);
        return static_cast<double>(*exact) / denom;
    }
    return std::exp(log_truncation_constant(n, m));
}

/**
 * Joint eigenvalue density of the m x m upper-left block of an n x n Haar
 * unitary, against Lebesgue measure on the closed disc D^m:
 * C_{[n,m]} prod_{i<j} |z_i - z_j|^2 prod_i (1 - |z_i|^2)^{n-m-1}.
 */
inline DensityPoint truncated_jpdf(int n, int m, std::span<Complex const> zeta) {
    detail::check_truncation(n, m);
    if (zeta.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument("truncated_jpdf: need exactly m points");
    }
    for (auto const& z : zeta) {
        if (std::norm(z) > 1.0) {
            throw std::invalid_argument("truncated_jpdf: point outside the closed unit disc");
        }
    }
    DensityPoint out;
    out.measure = Measure::per_lebesgue;
    out.points.assign(zeta.begin(), zeta.end());
    const int exponent = n - m - 1;
    double log_value = log_truncation_constant(n, m) + detail::log_abs_vandermonde_sq(zeta);
    if (exponent > 0) {
        for (auto const& z : zeta) {
            log_value += exponent * std::log1p(-std::norm(z));
        }
    }
    out.value = std::exp(log_value);
    return out;
}

/**
 * Density of the eigenvalues of sqrt(n/m) U_{[n,m]}: the truncated density
 * pulled back through w -> sqrt(m/n) w, with Jacobian (m/n)^m. Zero outside
 * the disc of radius sqrt(n/m).
 */
inline DensityPoint scaled_truncated_jpdf(int n, int m, std::span<Complex const> w) {
    detail::check_truncation(n, m);
    const double shrink = std::sqrt(static_cast<double>(m) / n);
    std::vector<Complex> zeta;
    zeta.reserve(w.size());
    bool inside = true;
    for (auto const& p : w) {
        zeta.push_back(p * shrink);
        inside = inside && std::norm(zeta.back()) <= 1.0;
    }
    DensityPoint out;
    out.measure = Measure::per_lebesgue;
    out.points.assign(w.begin(), w.end());
    if (inside) {
        out.value = truncated_jpdf(n, m, zeta).value * std::pow(shrink * shrink, m);
    } else if (w.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument("scaled_truncated_jpdf: need exactly m points");
    }
    return out;
}

/**
 * Joint eigenvalue density of an m x m Ginibre matrix with entry variance
 * 1/m, the n -> infinity limit of the scaled truncation:
 * m^{m(m+1)/2} / (pi^m prod_{k=1}^m k!) exp(-m sum |z_i|^2) prod_{i<j} |z_i - z_j|^2.
 */
inline DensityPoint ginibre_limit_density(int m, std::span<Complex const> zeta) {
    if (m < 1 || zeta.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument("ginibre_limit_density: need exactly m points");
    }
    double log_value = 0.5 * m * (m + 1) * std::log(static_cast<double>(m))
                       - m * std::log(std::numbers::pi);
    for (int k = 1; k <= m; ++k) {
        log_value -= detail::log_factorial(k);
    }
    for (auto const& z : zeta) {
        log_value -= m * std::norm(z);
    }
    log_value += detail::log_abs_vandermonde_sq(zeta);
    DensityPoint out;
    out.measure = Measure::per_lebesgue;
    out.points.assign(zeta.begin(), zeta.end());
    out.value = std::exp(log_value);
    return out;
}

//---------------------------------------------------------------------------//
// Single entries
//---------------------------------------------------------------------------//

/// Density of one entry U_ij on the unit disc: (n-1)/pi (1-|z|^2)^{n-2}.
inline double entry_density(int n, Complex z) {
    if (n < 2) {
        throw std::invalid_argument("entry_density: need n >= 2");
    }
    const double r2 = std::norm(z);
    if (r2 > 1.0) {
        return 0.0;
    }
    return (n - 1) / std::numbers::pi * std::pow(1.0 - r2, n - 2);
}

/// P(|sqrt(n) U_ij|^2 <= x) = 1 - (1 - x/n)^{n-1} for 0 <= x <= n.
inline double entry_radial_cdf(int n, double x) {
    if (n < 2) {
        throw std::invalid_argument("entry_radial_cdf: need n >= 2");
    }
    if (!(x >= 0.0 && x <= n)) {
        throw std::invalid_argument("entry_radial_cdf: x outside [0, n]");
    }
    return 1.0 - std::pow(1.0 - x / n, n - 1);
}

/// P(|U_ij| <= r) = 1 - (1 - r^2)^{n-1}; clamps r to [0, 1].
inline double entry_modulus_cdf(int n, double r) {
    if (n < 2) {
        throw std::invalid_argument("entry_modulus_cdf: need n >= 2");
    }
    if (r <= 0.0) {
        return 0.0;
    }
    if (r >= 1.0) {
        return 1.0;
    }
    return 1.0 - std::pow(1.0 - r * r, n - 1);
}

/// Columns re_1,im_1,...,re_k,im_k,value,measure; all rows need the same
/// number of points.
inline void write_density_csv(std::ostream& os, std::vector<DensityPoint> const& rows) {
    if (rows.empty()) {
        return;
    }
    const std::size_t k = rows.front().points.size();
    const auto precision = os.precision();
    for (std::size_t i = 1; i <= k; ++i) {
        os << "re_" << i << ",im_" << i << ',';
    }
    os << "value,measure\n" << std::setprecision(17);
    for (auto const& r : rows) {
        if (r.points.size() != k) {
            throw std::invalid_argument("write_density_csv: ragged point counts");
        }
        for (auto const& z : r.points) {
            os << z.real() << ',' << z.imag() << ',';
        }
        os << r.value << ',' << to_string(r.measure) << '\n';
    }
    os.precision(precision);
}

}  // namespace haarlab
