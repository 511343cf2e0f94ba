#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ergo {

using cplx = std::complex<double>;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// e(x) = exp(2 pi i x)
inline cplx unit_phase(double x) { return {std::cos(kTwoPi * x), std::sin(kTwoPi * x)}; }

// Thrown when an argument has the wrong shape (length mismatch, bad index).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a value is outside the mathematical domain of an operation.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a requested computation exceeds a pinned size guard.
struct GuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an operation does not support the given system/observable kind.
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed config/CSV input; message carries the line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline i64 checked_i64(i128 v, const char* what) {
    if (v > i128(INT64_MAX) || v < i128(INT64_MIN)) throw DomainError(std::string(what) + ": 64-bit overflow");
    return static_cast<i64>(v);
}

// binomial(n,2) and binomial(n,3) for signed n; both are integers for every n.
// |n| is capped well below 2^42 by every caller, so the i128 product is exact.
inline i64 binom2(i64 n) { return checked_i64(i128(n) * (n - 1) / 2, "binom2"); }
inline i64 binom3(i64 n) { return checked_i64(i128(n) * (n - 1) * (n - 2) / 6, "binom3"); }

}  // namespace ergo
