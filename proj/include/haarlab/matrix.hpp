// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rng.hpp"

namespace haarlab {

/// Dense complex matrix. Storage is column-major; serialized forms are
/// row-major.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Raised when a numerical routine cannot deliver its accuracy contract
/// (degenerate Gram-Schmidt residual, eigensolver non-convergence, overflow).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Matrix of i.i.d. standard complex normal entries, drawn column by column.
inline ComplexMatrix ginibre_matrix(RngStream& stream, Eigen::Index rows,
                                    Eigen::Index cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("ginibre_matrix: dimensions must be positive");
    }
    ComplexMatrix z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            z(i, j) = complex_normal(stream);
        }
    }
    return z;
}

/// max |(M^* M - I)_{ij}|, the column-orthonormality defect.
inline double isometry_defect(ComplexMatrix const& m) {
    const ComplexMatrix gram = m.adjoint() * m;
    return (gram - ComplexMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

/// max of the U^*U and UU^* defects.
inline double unitarity_defect(ComplexMatrix const& u) {
    if (u.rows() != u.cols()) {
        throw std::invalid_argument("unitarity_defect: matrix is not square");
    }
    const ComplexMatrix gram = u * u.adjoint();
    const double right =
        (gram - ComplexMatrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff();
    return std::max(isometry_defect(u), right);
}

inline double spectral_norm(ComplexMatrix const& m) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
}

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

/// {"rows": r, "cols": c, "entries": [[re, im], ...]} in row-major order.
inline nlohmann::json matrix_to_json(ComplexMatrix const& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            entries.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(nlohmann::json const& j) {
    const auto rows = j.at("rows").get<std::int64_t>();
    const auto cols = j.at("cols").get<std::int64_t>();
    auto const& entries = j.at("entries");
    if (rows < 1 || cols < 1 || !entries.is_array()
        || entries.size() != static_cast<std::size_t>(rows * cols)) {
        throw std::invalid_argument("matrix_from_json: shape does not match entries");
    }
    ComplexMatrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index jj = 0; jj < cols; ++jj, ++k) {
            auto const& pair = entries[k];
            if (!pair.is_array() || pair.size() != 2) {
                throw std::invalid_argument("matrix_from_json: entry is not [re, im]");
            }
            m(i, jj) = Complex(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    return m;
}

namespace detail {

template<class T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T> && sizeof(T) == 8);
    auto bits = std::bit_cast<std::uint64_t>(value);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) {
        bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    os.write(reinterpret_cast<char const*>(bytes), 8);
}

template<class T>
T read_le(std::istream& is) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
        throw std::runtime_error("read_matrix_binary: truncated input");
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
        bits |= std::uint64_t{bytes[b]} << (8 * b);
    }
    return std::bit_cast<T>(bits);
}

}  // namespace detail

/// uint64 rows, uint64 cols, then (re, im) float64 pairs row-major; all
/// little-endian.
inline void write_matrix_binary(std::ostream& os, ComplexMatrix const& m) {
    detail::write_le(os, static_cast<std::uint64_t>(m.rows()));
    detail::write_le(os, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            detail::write_le(os, m(i, j).real());
            detail::write_le(os, m(i, j).imag());
        }
    }
}

inline ComplexMatrix read_matrix_binary(std::istream& is) {
    const auto rows = detail::read_le<std::uint64_t>(is);
    const auto cols = detail::read_le<std::uint64_t>(is);
    constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 24;
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
        throw std::runtime_error("read_matrix_binary: invalid dimensions");
    }
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = detail::read_le<double>(is);
            const double im = detail::read_le<double>(is);
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

}  // namespace haarlab
