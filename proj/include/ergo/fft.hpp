#pragma once

#include <vector>

#include "ergo/common.hpp"

namespace ergo {

/// In-place radix-2 Cooley-Tukey transform; n must be a power of two.
/// Forward maps a[x] -> sum_x a[x] e(-x xi / n); inverse includes the 1/n factor.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ShapeError("fft_pow2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {  // bit-reversal permutation
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    // Twiddle table with each entry computed from its own phase (no
    // multiply-accumulated roots, so per-entry error stays at rounding level).
    std::vector<cplx> root(n / 2);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n / 2; ++j)
        root[j] = unit_phase(sign * static_cast<double>(j) / static_cast<double>(n));
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * root[j * step];
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse)
        for (cplx& x : a) x /= static_cast<double>(n);
}

/// Unnormalized forward transform for arbitrary length: F[xi] = sum_x a[x] e(-x xi / N).
/// Powers of two go through the radix-2 path, everything else through the
/// Bluestein chirp factorization xy = (x^2 + y^2 - (y-x)^2)/2.  Chirp phases are
/// reduced with x^2 mod 2N in integers before the one conversion to double.
inline std::vector<cplx> dft(std::vector<cplx> a) {
    const i64 N = static_cast<i64>(a.size());
    if (N == 0) return a;
    if ((N & (N - 1)) == 0) {
        fft_pow2(a, false);
        return a;
    }
    const i64 two_n = 2 * N;
    auto chirp = [&](i64 x) {  // e(-x^2 / (2N)) with the phase reduced mod 1 exactly
        i64 r = static_cast<i64>((u128(x) * u128(x)) % u128(two_n));
        return unit_phase(-static_cast<double>(r) / static_cast<double>(two_n));
    };
    std::size_t L = 1;
    while (L < static_cast<std::size_t>(2 * N - 1)) L <<= 1;
    std::vector<cplx> u(L, cplx{0.0, 0.0}), v(L, cplx{0.0, 0.0});
    for (i64 x = 0; x < N; ++x) {
        cplx c = chirp(x);
        u[static_cast<std::size_t>(x)] = a[static_cast<std::size_t>(x)] * c;
        v[static_cast<std::size_t>(x)] = std::conj(c);
        if (x > 0) v[L - static_cast<std::size_t>(x)] = std::conj(c);
    }
    fft_pow2(u, false);
    fft_pow2(v, false);
    for (std::size_t i = 0; i < L; ++i) u[i] *= v[i];
    fft_pow2(u, true);
    std::vector<cplx> out(static_cast<std::size_t>(N));
    for (i64 xi = 0; xi < N; ++xi) out[static_cast<std::size_t>(xi)] = chirp(xi) * u[static_cast<std::size_t>(xi)];
    return out;
}

/// Inverse of dft including the 1/N normalization: a[x] = (1/N) sum_xi F[xi] e(+x xi / N).
inline std::vector<cplx> inverse_dft(std::vector<cplx> f) {
    const double N = static_cast<double>(f.size());
    for (cplx& c : f) c = std::conj(c);
    f = dft(std::move(f));
    for (cplx& c : f) c = std::conj(c) / N;
    return f;
}

}  // namespace ergo
