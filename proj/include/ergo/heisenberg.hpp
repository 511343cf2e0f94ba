#pragma once

#include <numeric>
#include <string>

#include "ergo/common.hpp"

namespace ergo {

/// Exact rational with 64-bit numerator/denominator, always reduced, den > 0.
/// Intermediates run in 128 bits; overflow of the reduced result throws.
struct Rat64 {
    i64 num = 0;
    i64 den = 1;

    Rat64() = default;
    Rat64(i64 n) : num(n), den(1) {}
    Rat64(i64 n, i64 d) { *this = make(n, d); }

    static Rat64 make(i128 n, i128 d) {
        if (d == 0) throw DomainError("Rat64: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 a = n < 0 ? -n : n;
        // gcd on i128
        i128 b = d;
        while (b) { i128 t = a % b; a = b; b = t; }
        if (a == 0) a = 1;
        Rat64 r;
        r.num = checked_i64(n / a, "Rat64");
        r.den = checked_i64(d / a, "Rat64");
        return r;
    }

    friend Rat64 operator+(Rat64 a, Rat64 b) { return make(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den); }
    friend Rat64 operator-(Rat64 a, Rat64 b) { return make(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den); }
    friend Rat64 operator*(Rat64 a, Rat64 b) { return make(i128(a.num) * b.num, i128(a.den) * b.den); }
    friend Rat64 operator-(Rat64 a) { Rat64 r; r.num = -a.num; r.den = a.den; return r; }
    friend bool operator==(Rat64 a, Rat64 b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(Rat64 a, Rat64 b) { return !(a == b); }

    double to_real() const { return double(num) / double(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

inline Rat64 scale(i64 k, Rat64 a) { return Rat64::make(i128(k) * a.num, a.den); }

/// Element of the 3-dimensional Heisenberg group: upper unitriangular matrix
/// [1 x z; 0 1 y; 0 0 1] written as the triple (x, y, z) with multiplication
///   (x,y,z) * (x',y',z') = (x+x', y+y', z+z'+x*y').
/// T = i64 gives the lattice; T = Rat64 gives exact rational elements.
template <typename T>
struct HeisEl {
    T x{}, y{}, z{};

    friend bool operator==(const HeisEl& a, const HeisEl& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
    friend bool operator!=(const HeisEl& a, const HeisEl& b) { return !(a == b); }
};

using HeisInt = HeisEl<i64>;
using HeisRat = HeisEl<Rat64>;

template <typename T>
HeisEl<T> heis_mul(const HeisEl<T>& a, const HeisEl<T>& b) {
    return HeisEl<T>{T(a.x + b.x), T(a.y + b.y), T(a.z + b.z + a.x * b.y)};
}

template <typename T>
HeisEl<T> heis_inv(const HeisEl<T>& g) {
    return HeisEl<T>{T(-g.x), T(-g.y), T(g.x * g.y - g.z)};
}

inline i64 scale_el_scalar(i64 k, i64 v) { return checked_i64(i128(k) * v, "heis scale"); }
inline Rat64 scale_el_scalar(i64 k, Rat64 v) { return scale(k, v); }

/// g^n in closed form: (n x, n y, n z + C(n,2) x y).  Valid for every signed n
/// (the binomial is an integer for negative n as well).
template <typename T>
HeisEl<T> heis_pow(const HeisEl<T>& g, i64 n) {
    i64 c2 = binom2(n);
    return HeisEl<T>{scale_el_scalar(n, g.x), scale_el_scalar(n, g.y),
                     T(scale_el_scalar(n, g.z) + scale_el_scalar(c2, T(g.x * g.y)))};
}

/// [g,h] = g^-1 h^-1 g h = (0, 0, x y' - x' y); always central.
template <typename T>
HeisEl<T> heis_commutator(const HeisEl<T>& g, const HeisEl<T>& h) {
    return HeisEl<T>{T(0), T(0), T(g.x * h.y - h.x * g.y)};
}

struct HallPetresco {
    HeisInt z;   // x*y
    HeisInt w1;  // [x,y], central
};

/// The 2-step case of the Hall-Petresco identity: with z = x*y and w1 = [x,y],
///   x^k y^k = z^k * w1^C(k,2)   for every k >= 0,
/// exactly, because all higher correction terms live in the trivial third term
/// of the lower central series.
inline HallPetresco hall_petresco(const HeisInt& x, const HeisInt& y) {
    return HallPetresco{heis_mul(x, y), heis_commutator(x, y)};
}

}  // namespace ergo
