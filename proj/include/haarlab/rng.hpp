// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <cmath>

namespace haarlab {

using Complex = std::complex<double>;

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function.
 *
 * Counter-based: output block i is a pure function of (key, counter i), so a
 * stream can be positioned anywhere without generating the prefix.
 */
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    static constexpr int kRounds = 10;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < kRounds; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Seeded, reproducible random stream.
 *
 * The 64-bit seed is the Philox key. The 128-bit counter is split into the
 * stream index (high 64 bits) and a block position (low 64 bits), so distinct
 * stream indices walk disjoint counter ranges. Each stream has a period of
 * 2^64 blocks of 128 bits.
 *
 * Satisfies UniformRandomBitGenerator, but the sampling helpers below do not
 * go through <random> distributions, whose output is implementation-defined.
 */
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_index) noexcept
        : seed_(seed), stream_index_(stream_index) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }
    /// Number of 128-bit blocks consumed so far.
    std::uint64_t position() const noexcept { return block_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (used_ >= 2) {
            refill();
        }
        const auto lo = buffer_[2 * used_];
        const auto hi = buffer_[2 * used_ + 1];
        ++used_;
        return (std::uint64_t{hi} << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; never returns 0, so log() of it is finite.
    double uniform_open_closed() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer on [0, bound), unbiased (bitmask rejection).
    std::uint64_t uniform_index(std::uint64_t bound) noexcept {
        if (bound <= 1) {
            return 0;
        }
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t x = (*this)() & mask;
            if (x < bound) {
                return x;
            }
        }
    }

    friend bool operator==(RngStream const&, RngStream const&) = default;

  private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{
            static_cast<std::uint32_t>(block_),
            static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_index_),
            static_cast<std::uint32_t>(stream_index_ >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                                  static_cast<std::uint32_t>(seed_ >> 32)};
        buffer_ = Philox4x32::apply(ctr, key);
        ++block_;
        used_ = 0;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_index_ = 0;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 2;
};

//---------------------------------------------------------------------------//
/*!
 * Standard complex normal variable by the polar construction:
 * R^2 ~ Exp(1), theta ~ U[0, 2pi), xi = R e^{i theta}.
 *
 * Re and Im are then independent N(0, 1/2), so E xi = 0, E|xi|^2 = 1 and
 * E(xi^k conj(xi)^l) = delta_{kl} k!.
 */
inline Complex complex_normal(RngStream& stream) noexcept {
    const double v = stream.uniform_open_closed();
    const double w = stream.uniform();
    const double radius = std::sqrt(-std::log(v));
    const double theta = 2.0 * std::numbers::pi * w;
    return std::polar(radius, theta);
}

/// Box-Muller variant; same law as complex_normal, different draw mapping.
inline Complex complex_normal_box_muller(RngStream& stream) noexcept {
    const double u1 = stream.uniform_open_closed();
    const double u2 = stream.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return Complex(r * std::cos(t), r * std::sin(t)) * std::numbers::sqrt2 * 0.5;
}

}  // namespace haarlab
