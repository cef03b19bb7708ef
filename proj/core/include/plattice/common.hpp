#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace plattice {

// Invalid parameters, malformed configs, schema violations.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Budget overruns (site counts, enumeration sizes).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Lattice site in Z^d, d <= kMaxDim.
inline constexpr int kMaxDim = 8;

struct Site {
    std::int32_t c[kMaxDim] = {0, 0, 0, 0, 0, 0, 0, 0};
    int d = 1;

    static Site zero(int dim) {
        Site s;
        s.d = dim;
        return s;
    }
    std::int32_t& operator[](int i) { return c[i]; }
    std::int32_t operator[](int i) const { return c[i]; }
    bool operator==(const Site& o) const {
        if (d != o.d) return false;
        for (int i = 0; i < d; ++i)
            if (c[i] != o.c[i]) return false;
        return true;
    }
    Site shifted(int axis, std::int32_t delta) const {
        Site s = *this;
        s.c[axis] += delta;
        return s;
    }
    std::int64_t l1() const {
        std::int64_t r = 0;
        for (int i = 0; i < d; ++i) r += c[i] < 0 ? -std::int64_t(c[i]) : c[i];
        return r;
    }
    std::int64_t linf() const {
        std::int64_t r = 0;
        for (int i = 0; i < d; ++i) {
            std::int64_t a = c[i] < 0 ? -std::int64_t(c[i]) : c[i];
            if (a > r) r = a;
        }
        return r;
    }
    double norm2sq() const {
        double r = 0;
        for (int i = 0; i < d; ++i) r += double(c[i]) * double(c[i]);
        return r;
    }
};

struct SiteHash {
    std::size_t operator()(const Site& s) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (int i = 0; i < s.d; ++i) {
            h ^= static_cast<std::uint32_t>(s.c[i]);
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

using Vec = std::vector<double>;   // point in R^d

inline double l1_norm(const double* v, int d) {
    double r = 0;
    for (int i = 0; i < d; ++i) r += v[i] < 0 ? -v[i] : v[i];
    return r;
}

}  // namespace plattice
