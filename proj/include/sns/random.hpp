#pragma once

// Counter-based Gaussian variates. Every draw is a pure function of
// (seed, stream, index, lane), so ensembles do not depend on scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sns/field.hpp"

namespace sns {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds.
inline Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Uniform on the open interval (0, 1).
inline double to_unit_open(std::uint32_t x) { return (double(x) + 0.5) * 0x1p-32; }

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    Philox4x32Counter block(std::uint32_t index, std::uint32_t lane) const {
        return philox4x32({index, lane, std::uint32_t(stream_), std::uint32_t(stream_ >> 32)},
                          {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
    }

    /// Standard normal by Box-Muller on the first two words of the block.
    double normal(std::uint32_t index, std::uint32_t lane) const {
        const auto b = block(index, lane);
        const double r = std::sqrt(-2.0 * std::log(to_unit_open(b[0])));
        return r * std::cos(2.0 * std::numbers::pi * to_unit_open(b[1]));
    }

    double uniform(std::uint32_t index, std::uint32_t lane) const { return to_unit_open(block(index, lane)[2]); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Random field on the first n modes, coefficient i ~ N(0, 1) * (1 + |kappa_i|^2)^(-decay / 2).
inline SpectralField random_field(const BasisPtr& basis, std::size_t n, const CounterRng& rng, std::uint32_t draw,
                                  double decay = 0.0) {
    SpectralField u(basis);
    const std::size_t m = std::min(n, basis->size());
    for (std::size_t i = 0; i < m; ++i)
        u[i] = rng.normal(draw, static_cast<std::uint32_t>(i)) * std::pow(1.0 + basis->mode(i).k2, -decay / 2.0);
    return u;
}

} // namespace sns
