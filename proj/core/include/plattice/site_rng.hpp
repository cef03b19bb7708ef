#pragma once

// Counter-based per-site randomness. The draw at lattice site x is a pure
// function of (global_seed, stream_id, x, draw_index), so two process
// variants sharing a seed see bit-identical perturbation fields. That is the
// exact shared-randomness coupling the deletion/insertion experiments rely on.

#include <cmath>
#include <cstdint>

#include "plattice/common.hpp"

namespace plattice {

namespace detail {

// Philox 4x32-10 (Salmon et al. 2011), round constants as published.
struct PhiloxBlock {
    std::uint32_t v[4];
};

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr[0] = hi1 ^ ctr[1] ^ key[0];
    ctr[1] = lo1;
    ctr[2] = hi0 ^ ctr[3] ^ key[1];
    ctr[3] = lo0;
}

inline PhiloxBlock philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
    std::uint32_t ctr[4] = {c0, c1, c2, c3};
    std::uint32_t key[2] = {k0, k1};
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, key);
        key[0] += W0;
        key[1] += W1;
    }
    return PhiloxBlock{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint32_t zigzag32(std::int32_t v) {
    return (std::uint32_t(v) << 1) ^ std::uint32_t(v >> 31);
}

// Fold the coordinate vector into 64 bits with full avalanche per coordinate.
inline std::uint64_t site_code(const Site& s) {
    std::uint64_t h = 0x853C49E6748FEA9Bull ^ std::uint64_t(s.d);
    for (int i = 0; i < s.d; ++i) h = splitmix64(h ^ zigzag32(s.c[i]));
    return h;
}

}  // namespace detail

// Identifies one independent randomness field. Distinct stream ids give
// independent fields over the same sites (e.g. the Y vs Y' layers).
struct SiteRng {
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;

    SiteRng() = default;
    SiteRng(std::uint64_t seed_, std::uint32_t stream_) : seed(seed_), stream(stream_) {}

    SiteRng with_stream(std::uint32_t s) const { return SiteRng(seed, s); }

    // 128 raw bits for (site, draw_index).
    detail::PhiloxBlock block(const Site& site, std::uint32_t draw_index) const {
        const std::uint64_t code = detail::site_code(site);
        return detail::philox4x32(std::uint32_t(code), std::uint32_t(code >> 32), stream,
                                  draw_index, std::uint32_t(seed), std::uint32_t(seed >> 32));
    }

    std::uint64_t bits64(const Site& site, std::uint32_t draw_index) const {
        const auto b = block(site, draw_index);
        return (std::uint64_t(b.v[0]) << 32) | b.v[1];
    }

    // Two uniforms in (0,1), strictly away from the endpoints.
    void uniform_pair(const Site& site, std::uint32_t draw_index, double& u1, double& u2) const {
        const auto b = block(site, draw_index);
        const std::uint64_t a = (std::uint64_t(b.v[0]) << 32) | b.v[1];
        const std::uint64_t c = (std::uint64_t(b.v[2]) << 32) | b.v[3];
        u1 = (double(a >> 11) + 0.5) * 0x1.0p-53;
        u2 = (double(c >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(const Site& site, std::uint32_t draw_index) const {
        double u1, u2;
        uniform_pair(site, draw_index, u1, u2);
        return u1;
    }

    // Box-Muller pair of standard normals.
    void normal_pair(const Site& site, std::uint32_t draw_index, double& z1, double& z2) const {
        double u1, u2;
        uniform_pair(site, draw_index, u1, u2);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        z1 = r * std::cos(t);
        z2 = r * std::sin(t);
    }
};

// Derive an unrelated sub-seed (replicate sharding, calibration vs
// evaluation phases). Pure and collision-resistant in practice.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return detail::splitmix64(seed ^ detail::splitmix64(salt));
}

}  // namespace plattice
