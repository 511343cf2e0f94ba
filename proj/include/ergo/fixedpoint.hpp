#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ergo/common.hpp"

namespace ergo {

/// A point of the circle R/Z stored as raw/2^64.  The group operations
/// (add, sub, integer scalar multiple) are exact: they are arithmetic mod 2^64,
/// so results are bit-reproducible on every platform.  Conversion to double
/// happens only when a value is *observed* (evaluating a character, printing).
struct TorusCoord {
    u64 raw = 0;

    constexpr TorusCoord() = default;
    constexpr explicit TorusCoord(u64 r) : raw(r) {}

    friend constexpr TorusCoord operator+(TorusCoord a, TorusCoord b) { return TorusCoord{a.raw + b.raw}; }
    friend constexpr TorusCoord operator-(TorusCoord a, TorusCoord b) { return TorusCoord{a.raw - b.raw}; }
    friend constexpr bool operator==(TorusCoord a, TorusCoord b) { return a.raw == b.raw; }
    friend constexpr bool operator!=(TorusCoord a, TorusCoord b) { return a.raw != b.raw; }

    // n*x mod 1, exact for any signed n (two's-complement wraparound).
    friend constexpr TorusCoord operator*(i64 n, TorusCoord x) { return TorusCoord{static_cast<u64>(n) * x.raw}; }

    double to_real() const { return std::ldexp(static_cast<double>(raw), -64); }

    // Distance to the nearest integer, ||x||.
    double dist_to_zero() const {
        u64 d = raw > (u64(1) << 63) ? u64(0) - raw : raw;
        return std::ldexp(static_cast<double>(d), -64);
    }
};

/// Round a real number to the nearest lattice point of 2^-64 Z / Z.
/// Dyadic rationals with denominator <= 2^64 are represented exactly.
inline TorusCoord coord_from_real(double x) {
    double f = x - std::floor(x);
    long double scaled = static_cast<long double>(f) * 18446744073709551616.0L;  // 2^64
    long double rounded = std::floor(scaled + 0.5L);
    if (rounded >= 18446744073709551616.0L) rounded = 0.0L;  // wrapped to 1.0
    return TorusCoord{static_cast<u64>(rounded)};
}

/// Exact rational lattice point p/q rounded to nearest 2^-64 grid point.
inline TorusCoord coord_from_fraction(i64 p, i64 q) {
    if (q <= 0) throw DomainError("coord_from_fraction: q must be positive");
    i64 r = p % q;
    if (r < 0) r += q;
    // floor(r * 2^64 / q + 1/2) computed in 128-bit
    u128 num = u128(r) << 64;
    u128 result = (num + u128(q) / 2) / u128(q);
    return TorusCoord{static_cast<u64>(result)};
}

// floor(sqrt(v)) for 128-bit v, by Newton iteration seeded from double sqrt.
inline u128 isqrt_u128(u128 v) {
    if (v == 0) return 0;
    long double approx = std::sqrt(static_cast<long double>(v));
    u128 x = static_cast<u128>(approx);
    // A couple of Newton steps then exact adjustment.
    for (int i = 0; i < 4; ++i) {
        if (x == 0) { x = 1; continue; }
        x = (x + v / x) / 2;
    }
    while (x > 0 && x * x > v) --x;
    while ((x + 1) * (x + 1) <= v) ++x;
    return x;
}

/// floor((sqrt(2)-1) * 2^64): default irrational rotation angle.
/// floor(sqrt(2)*2^64) = floor(sqrt(2^129)) = 2r or 2r+1 where r = floor(sqrt(2^127));
/// the +1 case is decided by (2r+1)^2 <= 2^129, rearranged to avoid overflow.
inline TorusCoord alpha_sqrt2m1() {
    u128 r = isqrt_u128(u128(1) << 127);
    u128 t = (u128(1) << 127) - r * r;
    u64 adjust = (u128(4) * r + 1 <= u128(4) * t) ? 1 : 0;
    u128 m = 2 * r + adjust;
    return TorusCoord{static_cast<u64>(m - (u128(1) << 64))};  // drop the integer part 1
}

/// floor(((sqrt(5)-1)/2) * 2^64): golden-ratio rotation angle.
/// floor(sqrt(5)*2^64) = floor(sqrt(5*2^128)) = 4r + k, r = floor(sqrt(5*2^124)),
/// with k in {0..3} maximal such that (4r+k)^2 <= 5*2^128, i.e. 8rk + k^2 <= 16t
/// where t = 5*2^124 - r^2 (rearranged so nothing overflows u128).
inline TorusCoord alpha_golden() {
    const u128 v = u128(5) << 124;
    u128 r = isqrt_u128(v);
    u128 t = v - r * r;
    u64 k = 0;
    while (k < 3 && u128(8) * r * (k + 1) + u128(k + 1) * (k + 1) <= u128(16) * t) ++k;
    u128 s5 = 4 * r + k;                      // floor(sqrt(5)*2^64)
    u128 num = s5 - (u128(1) << 64);          // floor((sqrt(5)-1)*2^64)
    return TorusCoord{static_cast<u64>(num / 2)};
}

/// A point of R/Z on the 2^-128 grid.  Products of two TorusCoord values are
/// exact on this grid (64x64 -> 128 bit multiply), which is what makes the
/// nilmanifold orbit arithmetic bit-reproducible.
struct Frac128 {
    u128 raw = 0;

    constexpr Frac128() = default;
    constexpr explicit Frac128(u128 r) : raw(r) {}
    static constexpr Frac128 from_coord(TorusCoord c) { return Frac128{u128(c.raw) << 64}; }

    friend constexpr Frac128 operator+(Frac128 a, Frac128 b) { return Frac128{a.raw + b.raw}; }
    friend constexpr Frac128 operator-(Frac128 a, Frac128 b) { return Frac128{a.raw - b.raw}; }
    friend constexpr bool operator==(Frac128 a, Frac128 b) { return a.raw == b.raw; }
    friend constexpr bool operator!=(Frac128 a, Frac128 b) { return a.raw != b.raw; }
    friend constexpr Frac128 operator*(i64 n, Frac128 x) { return Frac128{static_cast<u128>(n) * x.raw}; }

    double to_real() const {
        return std::ldexp(static_cast<double>(static_cast<u64>(raw >> 64)), -64) +
               std::ldexp(static_cast<double>(static_cast<u64>(raw)), -128);
    }
};

// Exact product x*y mod 1 of two circle points, landing on the 2^-128 grid.
inline constexpr Frac128 exact_product(TorusCoord x, TorusCoord y) {
    return Frac128{u128(x.raw) * u128(y.raw)};
}

inline std::string coord_to_hex(TorusCoord c) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(c.raw));
    return std::string(buf);
}

}  // namespace ergo
