#pragma once
/**
 * @file rng.hpp
 * @brief Counter-based Philox4x32-10 generator (Salmon et al., SC'11) and a
 *        keyed standard-normal draw.
 *
 * A draw is a pure function of (key, counter), so any cell of any Monte Carlo
 * sample can be reproduced without replaying a stream.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochwave::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}
}  // namespace detail

constexpr Counter philox4x32(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
        detail::mulhilo(detail::kMul0, c[0], hi0, lo0);
        detail::mulhilo(detail::kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += detail::kWeyl0;
        k[1] += detail::kWeyl1;
    }
    return c;
}

constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform on (0, 1] with 53 random bits from two 32-bit words.
inline double to_unit_open0(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    bits &= (std::uint64_t{1} << 53) - 1;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Standard normal variate keyed on (seed, stream, index) via Box-Muller.
inline double normal(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
    Counter c{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0x5eed5eedu};
    Counter r = philox4x32(c, key_from_seed(seed));
    double u1 = to_unit_open0(r[0], r[1]);
    double u2 = to_unit_open0(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform on (0, 1] keyed on (seed, stream, index).
inline double uniform(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
    Counter c{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0x0a11u};
    Counter r = philox4x32(c, key_from_seed(seed));
    return to_unit_open0(r[0], r[1]);
}

}  // namespace stochwave::rng
