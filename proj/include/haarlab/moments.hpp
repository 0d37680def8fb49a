// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rational.hpp"

namespace haarlab {

//---------------------------------------------------------------------------//
// Entry moments
//---------------------------------------------------------------------------//

/// One factor U_{row,col}^k * conj(U_{row,col})^m; indices are 1-based.
struct MomentFactor {
    int row = 1;
    int col = 1;
    int k = 0;
    int m = 0;
};

/// Product of entry powers of an n x n Haar unitary.
struct MomentSpec {
    int n = 1;
    std::vector<MomentFactor> factors;

    void validate() const {
        if (n < 1) {
            throw std::invalid_argument("MomentSpec: n must be positive");
        }
        if (factors.empty()) {
            throw std::invalid_argument("MomentSpec: at least one factor required");
        }
        for (auto const& f : factors) {
            if (f.row < 1 || f.row > n || f.col < 1 || f.col > n) {
                throw std::invalid_argument("MomentSpec: index outside [1, n]");
            }
            if (f.k < 0 || f.m < 0) {
                throw std::invalid_argument("MomentSpec: negative power");
            }
        }
    }
};

/**
 * True when some row u or column v has a nonzero net power
 * sum (k_r - m_r) over the factors that touch it.
 *
 * Multiplying U from the left (or right) by Diag(1, .., e^{it}, .., 1)
 * leaves the Haar law unchanged but multiplies the product by e^{i t s},
 * where s is that net power, so the expectation is zero.
 */
inline bool is_forced_zero(MomentSpec const& spec) {
    spec.validate();
    std::map<int, long> row_net;
    std::map<int, long> col_net;
    for (auto const& f : spec.factors) {
        row_net[f.row] += f.k - f.m;
        col_net[f.col] += f.k - f.m;
    }
    for (auto const& [_, net] : row_net) {
        if (net != 0) {
            return true;
        }
    }
    for (auto const& [_, net] : col_net) {
        if (net != 0) {
            return true;
        }
    }
    return false;
}

/// Value of the monomial described by spec on a concrete matrix.
inline Complex evaluate_monomial(ComplexMatrix const& u, MomentSpec const& spec) {
    Complex value = 1.0;
    for (auto const& f : spec.factors) {
        const Complex x = u(f.row - 1, f.col - 1);
        const Complex xc = std::conj(x);
        for (int p = 0; p < f.k; ++p) {
            value *= x;
        }
        for (int p = 0; p < f.m; ++p) {
            value *= xc;
        }
    }
    return value;
}

/**
 * E|U_ij|^{2k} = k! (n-1)! / (n+k-1)! = 1 / C(n+k-1, k).
 *
 * Follows from the entry density (n-1)/pi (1-r^2)^{n-2} on the disc. For
 * n = 1 the single entry is unimodular, so every moment is 1.
 */
inline Rational entry_abs_moment(int n, int k) {
    if (n < 1 || k < 0) {
        throw std::invalid_argument("entry_abs_moment: need n >= 1, k >= 0");
    }
    if (n == 1) {
        return Rational(1);
    }
    return Rational(1, binomial_exact(n + k - 1, k));
}

//---------------------------------------------------------------------------//
// Diagonal products M_k^n = E(|U_11|^2 ... |U_kk|^2)
//---------------------------------------------------------------------------//

struct DiagonalMomentResult {
    /// (n-k)!/n!
    Rational leading;
    /// true when leading equals M_k^n exactly (k = 1)
    bool exact = false;
    /**
     * Upper bound on the relative correction eps = 1 - M_k^n / leading.
     *
     * eps is the total mass of index tuples with a repeated row among the
     * n^k tuples that sum to 1; each such term is at most E|U_11|^{2k} by
     * Hoelder, so eps <= (n^k - n!/(n-k)!) * E|U_11|^{2k}, which is O(1/n).
     */
    double relative_error_bound = 0.0;
};

inline DiagonalMomentResult diagonal_product_moment_leading(int n, int k) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("diagonal_product_moment_leading: need 1 <= k <= n");
    }
    Rational::Int falling = 1;  // n!/(n-k)!
    for (int i = 0; i < k; ++i) {
        falling = Rational::checked_mul(falling, n - i);
    }
    DiagonalMomentResult out;
    out.leading = Rational(1, falling);
    out.exact = (k == 1);
    if (!out.exact) {
        const double tuples = std::pow(static_cast<double>(n), k);
        const double repeated = tuples - static_cast<double>(falling);
        const double bound = repeated * entry_abs_moment(n, k).to_double();
        out.relative_error_bound = std::min(1.0, bound);
    }
    return out;
}

//---------------------------------------------------------------------------//
// Limit moments of traces
//---------------------------------------------------------------------------//

/// lim E|Tr U^l|^{2k} = k! l^k.
inline std::uint64_t limit_trace_moment(int k, int l) {
    if (k < 0 || l < 1) {
        throw std::invalid_argument("limit_trace_moment: need k >= 0, l >= 1");
    }
    Rational::Int v = factorial_exact(k);
    for (int i = 0; i < k; ++i) {
        v = Rational::checked_mul(v, l);
    }
    if (v > static_cast<Rational::Int>(UINT64_MAX)) {
        throw std::overflow_error("limit_trace_moment: overflow");
    }
    return static_cast<std::uint64_t>(v);
}

/// Powers a_i of Tr U^i and b_i of conj(Tr U^i), i = 1..l.
struct LimitMomentQuery {
    std::vector<int> a;
    std::vector<int> b;

    void validate() const {
        if (a.empty() || a.size() != b.size()) {
            throw std::invalid_argument("LimitMomentQuery: a and b need equal nonzero length");
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] < 0 || b[i] < 0) {
                throw std::invalid_argument("LimitMomentQuery: negative power");
            }
        }
    }
    int max_power() const { return static_cast<int>(a.size()); }
};

/// lim E prod_i (Tr U^i)^{a_i} conj(Tr U^i)^{b_i} = prod_i delta_{a_i b_i} a_i! i^{a_i}.
inline std::uint64_t limit_mixed_moment(LimitMomentQuery const& q) {
    q.validate();
    Rational::Int v = 1;
    for (std::size_t idx = 0; idx < q.a.size(); ++idx) {
        if (q.a[idx] != q.b[idx]) {
            return 0;
        }
        v = Rational::checked_mul(
            v, static_cast<Rational::Int>(limit_trace_moment(q.a[idx], static_cast<int>(idx) + 1)));
    }
    if (v > static_cast<Rational::Int>(UINT64_MAX)) {
        throw std::overflow_error("limit_mixed_moment: overflow");
    }
    return static_cast<std::uint64_t>(v);
}

/// prod_i (Tr U^i)^{a_i} conj(Tr U^i)^{b_i} given traces[i-1] = Tr U^i.
inline Complex evaluate_trace_monomial(std::vector<Complex> const& traces,
                                       LimitMomentQuery const& q) {
    Complex value = 1.0;
    for (std::size_t i = 0; i < q.a.size(); ++i) {
        const Complex t = traces.at(i);
        for (int p = 0; p < q.a[i]; ++p) {
            value *= t;
        }
        for (int p = 0; p < q.b[i]; ++p) {
            value *= std::conj(t);
        }
    }
    return value;
}

/// E(xi^k conj(xi)^l) = delta_{kl} k! for a standard complex normal xi.
inline std::uint64_t complex_normal_moment(int k, int l) {
    if (k < 0 || l < 0) {
        throw std::invalid_argument("complex_normal_moment: negative power");
    }
    if (k != l) {
        return 0;
    }
    const auto f = factorial_exact(k);
    if (f > static_cast<Rational::Int>(UINT64_MAX)) {
        throw std::overflow_error("complex_normal_moment: overflow");
    }
    return static_cast<std::uint64_t>(f);
}

//---------------------------------------------------------------------------//
// CSV export
//---------------------------------------------------------------------------//

struct FormulaRow {
    std::optional<int> n;
    std::optional<int> k;
    std::optional<int> l;
    double value = 0.0;
    std::string kind;
};

/// Table of formula values: entry moments and diagonal leading terms for
/// 2 <= n <= n_max, limit trace moments and complex normal moments for the
/// given k and l ranges.
inline std::vector<FormulaRow> formula_table(int n_max, int k_max, int l_max) {
    std::vector<FormulaRow> rows;
    for (int n = 2; n <= n_max; ++n) {
        for (int k = 0; k <= k_max; ++k) {
            rows.push_back({n, k, std::nullopt, entry_abs_moment(n, k).to_double(),
                            "entry_abs_moment"});
        }
        for (int k = 1; k <= std::min(k_max, n); ++k) {
            rows.push_back({n, k, std::nullopt,
                            diagonal_product_moment_leading(n, k).leading.to_double(),
                            "diagonal_leading"});
        }
    }
    for (int k = 0; k <= k_max; ++k) {
        for (int l = 1; l <= l_max; ++l) {
            rows.push_back({std::nullopt, k, l,
                            static_cast<double>(limit_trace_moment(k, l)),
                            "limit_trace_moment"});
        }
        rows.push_back({std::nullopt, k, k,
                        static_cast<double>(complex_normal_moment(k, k)),
                        "complex_normal_moment"});
    }
    return rows;
}

/// Columns n,k,l,value,kind; absent fields are empty.
inline void write_formula_csv(std::ostream& os, std::vector<FormulaRow> const& rows) {
    const auto precision = os.precision();
    os << "n,k,l,value,kind\n" << std::setprecision(17);
    auto field = [&](std::optional<int> const& v) {
        if (v) {
            os << *v;
        }
        os << ',';
    };
    for (auto const& r : rows) {
        field(r.n);
        field(r.k);
        field(r.l);
        os << r.value << ',' << r.kind << '\n';
    }
    os.precision(precision);
}

}  // namespace haarlab
