// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "matrix.hpp"

namespace haarlab {

/// Argument reduced to the half-open interval [0, 2pi).
inline double reduce_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a < 0.0) {
        a += two_pi;
    }
    if (a >= two_pi) {
        a = 0.0;
    }
    return a;
}

struct Spectrum {
    std::vector<Complex> values;
    std::vector<double> angles;  // arg(values[i]) in [0, 2pi)

    std::size_t size() const noexcept { return values.size(); }
};

/// All eigenvalues of a square matrix (complex Schur, eigenvalues only).
inline Spectrum eigenvalues(ComplexMatrix const& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("eigenvalues: matrix is not square");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("eigenvalues: non-finite entries");
    }
    Spectrum s;
    const auto n = static_cast<std::size_t>(m.rows());
    s.values.reserve(n);
    s.angles.reserve(n);
    if (m.rows() == 1) {
        s.values.push_back(m(0, 0));
    } else {
        Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("eigenvalues: QR iteration did not converge");
        }
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            s.values.push_back(solver.eigenvalues()(i));
        }
    }
    for (auto const& z : s.values) {
        s.angles.push_back(reduce_angle(std::arg(z)));
    }
    return s;
}

namespace detail {

inline void check_trace_power_args(ComplexMatrix const& m, int l) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("trace_power: matrix is not square");
    }
    if (l < 1) {
        throw std::invalid_argument("trace_power: power must be positive");
    }
}

inline Complex checked_trace(Complex t) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
        throw NumericalError("trace_power: result overflowed");
    }
    return t;
}

}  // namespace detail

/// Tr(M^l) by repeated multiplication; the final product is contracted
/// straight into the trace.
inline Complex trace_power_by_products(ComplexMatrix const& m, int l) {
    detail::check_trace_power_args(m, l);
    if (l == 1) {
        return m.trace();
    }
    ComplexMatrix p = m;
    for (int step = 2; step < l; ++step) {
        p = (p * m).eval();
        if (!p.allFinite()) {
            throw NumericalError("trace_power: matrix power overflowed");
        }
    }
    // Tr(P M) = sum_ij P_ij M_ji
    return detail::checked_trace(p.cwiseProduct(m.transpose()).sum());
}

/// z^l by binary powering.
inline Complex integer_power(Complex z, int l) {
    Complex result = 1.0;
    while (l > 0) {
        if (l & 1) {
            result *= z;
        }
        z *= z;
        l >>= 1;
    }
    return result;
}

inline Complex trace_power_by_eigenvalues(Spectrum const& spectrum, int l) {
    if (l < 1) {
        throw std::invalid_argument("trace_power: power must be positive");
    }
    Complex sum = 0.0;
    for (auto const& z : spectrum.values) {
        sum += integer_power(z, l);
    }
    return detail::checked_trace(sum);
}

inline Complex trace_power_by_eigenvalues(ComplexMatrix const& m, int l) {
    detail::check_trace_power_args(m, l);
    return trace_power_by_eigenvalues(eigenvalues(m), l);
}

/// Powers up to this use repeated products; larger ones use the spectrum.
inline constexpr int kTracePowerProductLimit = 8;

inline Complex trace_power(ComplexMatrix const& m, int l) {
    return l <= kTracePowerProductLimit ? trace_power_by_products(m, l)
                                        : trace_power_by_eigenvalues(m, l);
}

/// Tr U, Tr U^2, ..., Tr U^max_power by repeated multiplication.
inline std::vector<Complex> traces_of_powers(ComplexMatrix const& m, int max_power) {
    detail::check_trace_power_args(m, max_power);
    std::vector<Complex> traces;
    traces.reserve(static_cast<std::size_t>(max_power));
    traces.push_back(m.trace());
    ComplexMatrix p = m;
    for (int l = 2; l <= max_power; ++l) {
        if (l == max_power) {
            traces.push_back(p.cwiseProduct(m.transpose()).sum());
        } else {
            p = (p * m).eval();
            traces.push_back(p.trace());
        }
        detail::checked_trace(traces.back());
    }
    return traces;
}

/// Arguments of lambda_j^power, i.e. (power * theta_j) mod 2pi.
inline std::vector<double> eigenangle_powers(ComplexMatrix const& u, int power) {
    if (power < 1) {
        throw std::invalid_argument("eigenangle_powers: power must be positive");
    }
    if (u.rows() != u.cols() || unitarity_defect(u) > 1e-10) {
        throw std::invalid_argument("eigenangle_powers: matrix is not unitary");
    }
    const Spectrum s = eigenvalues(u);
    std::vector<double> out;
    out.reserve(s.size());
    for (double theta : s.angles) {
        out.push_back(reduce_angle(static_cast<double>(power) * theta));
    }
    return out;
}

/// CSV with header index,re,im,angle.
inline void write_spectrum_csv(std::ostream& os, Spectrum const& s) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "index,re,im,angle\n" << std::setprecision(17);
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << i << ',' << s.values[i].real() << ',' << s.values[i].imag() << ','
           << s.angles[i] << '\n';
    }
    os.flags(flags);
    os.precision(precision);
}

}  // namespace haarlab
