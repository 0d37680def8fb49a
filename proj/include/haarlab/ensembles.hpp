// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "matrix.hpp"
#include "rng.hpp"

namespace haarlab {

/// Tolerance on max|U^*U - I| that every sampled unitary satisfies.
inline constexpr double kUnitarityTolerance = 1e-12;

/// Residual norms below this (times sqrt(n)) count as a degenerate column.
inline constexpr double kDegenerateResidual = 1e-14;

/// Resampling attempts before a degenerate input is reported as an error.
inline constexpr int kMaxResamples = 16;

namespace detail {

// Modified Gram-Schmidt, in place, on the columns of q. When resample is
// set, a column whose residual collapses is replaced by a fresh Gaussian
// column from the stream; otherwise a collapse is an error.
inline void modified_gram_schmidt(ComplexMatrix& q, RngStream* resample) {
    const Eigen::Index n = q.rows();
    const double threshold = kDegenerateResidual * std::sqrt(static_cast<double>(n));
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
        for (int attempt = 0;; ++attempt) {
            for (Eigen::Index l = 0; l < i; ++l) {
                const Complex proj = q.col(l).dot(q.col(i));
                q.col(i) -= proj * q.col(l);
            }
            const double norm = q.col(i).norm();
            if (norm >= threshold) {
                q.col(i) /= norm;
                break;
            }
            if (resample == nullptr || attempt >= kMaxResamples) {
                throw NumericalError("Gram-Schmidt: degenerate residual in column "
                                     + std::to_string(i));
            }
            for (Eigen::Index r = 0; r < n; ++r) {
                q(r, i) = complex_normal(*resample);
            }
        }
    }
}

}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * First m columns of a Haar unitary of size n.
 *
 * Gram-Schmidt on an n x m Ginibre matrix. Gaussian entries are drawn
 * column by column, so for the same stream state this equals the first m
 * columns of haar_unitary(stream, n) (up to the re-orthogonalization pass,
 * which is only triggered on loss of orthogonality).
 */
inline ComplexMatrix haar_isometry(RngStream& stream, Eigen::Index n, Eigen::Index m) {
    if (n < 1 || m < 1 || m > n) {
        throw std::invalid_argument("haar_isometry: need 1 <= m <= n");
    }
    ComplexMatrix q = ginibre_matrix(stream, n, m);
    detail::modified_gram_schmidt(q, &stream);
    if (isometry_defect(q) > kUnitarityTolerance) {
        // Second pass over an already orthonormal-up-to-rounding basis: same
        // column flags, so the law is unchanged.
        detail::modified_gram_schmidt(q, nullptr);
        if (isometry_defect(q) > kUnitarityTolerance) {
            throw NumericalError("Gram-Schmidt: orthogonality lost after second pass");
        }
    }
    return q;
}

/// Haar unitary by Gram-Schmidt orthonormalization of a Ginibre matrix.
inline ComplexMatrix haar_unitary(RngStream& stream, Eigen::Index n) {
    if (n < 1) {
        throw std::invalid_argument("haar_unitary: n must be positive");
    }
    return haar_isometry(stream, n, n);
}

/// Haar unitary via Householder QR of a Ginibre matrix, with the columns of
/// Q rephased so that the diagonal of R is positive real.
inline ComplexMatrix haar_unitary_qr(RngStream& stream, Eigen::Index n) {
    if (n < 1) {
        throw std::invalid_argument("haar_unitary_qr: n must be positive");
    }
    const double threshold = kDegenerateResidual * std::sqrt(static_cast<double>(n));
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        const ComplexMatrix z = ginibre_matrix(stream, n, n);
        Eigen::HouseholderQR<ComplexMatrix> qr(z);
        const auto diag = qr.matrixQR().diagonal();
        if (diag.cwiseAbs().minCoeff() < threshold) {
            continue;
        }
        ComplexMatrix q = qr.householderQ();
        for (Eigen::Index j = 0; j < n; ++j) {
            q.col(j) *= diag(j) / std::abs(diag(j));
        }
        return q;
    }
    throw NumericalError("haar_unitary_qr: degenerate Ginibre input");
}

enum class HaarMethod { gram_schmidt, householder_qr };

inline ComplexMatrix sample_haar(RngStream& stream, Eigen::Index n, HaarMethod method) {
    return method == HaarMethod::gram_schmidt ? haar_unitary(stream, n)
                                              : haar_unitary_qr(stream, n);
}

//---------------------------------------------------------------------------//
// Truncations
//---------------------------------------------------------------------------//

/// Keep the upper-left m x m block of an n x n unitary, optionally scaled by
/// sqrt(n/m).
struct TruncationSpec {
    Eigen::Index n = 2;
    Eigen::Index m = 1;
    bool scaled = false;

    void validate() const {
        if (m < 1 || m >= n) {
            throw std::invalid_argument("TruncationSpec: need 1 <= m < n");
        }
    }
    double scale() const {
        return scaled ? std::sqrt(static_cast<double>(n) / static_cast<double>(m)) : 1.0;
    }
};

inline ComplexMatrix truncate(ComplexMatrix const& u, TruncationSpec const& spec) {
    spec.validate();
    if (u.rows() != spec.n || u.cols() != spec.n) {
        throw std::invalid_argument("truncate: matrix is not n x n");
    }
    return u.topLeftCorner(spec.m, spec.m) * spec.scale();
}

/// Same law as truncate(haar_unitary(stream, n), spec) at O(n m^2) cost.
inline ComplexMatrix sample_truncation(RngStream& stream, TruncationSpec const& spec) {
    spec.validate();
    const ComplexMatrix q = haar_isometry(stream, spec.n, spec.m);
    return q.topRows(spec.m) * spec.scale();
}

/// Ginibre matrix with entry variance 1/m (the scaled-truncation limit).
inline ComplexMatrix sample_ginibre_limit(RngStream& stream, Eigen::Index m) {
    return ginibre_matrix(stream, m, m) / std::sqrt(static_cast<double>(m));
}

}  // namespace haarlab
