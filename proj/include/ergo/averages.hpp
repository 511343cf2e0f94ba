#pragma once

#include <array>
#include <utility>
#include <vector>

#include "ergo/observables.hpp"
#include "ergo/systems.hpp"

namespace ergo {

/// Exponent pattern n -> (p_1(n), ..., p_k(n)) with exact integer coefficients.
struct IteratePattern {
    std::vector<std::vector<i64>> polys;  // p_j(n) = c0 + c1 n + c2 n^2 + ...
    bool zero_at_origin = true;           // whether p_j(0) = 0 for every j
};

/// p_j(n) = j*n for j = 1..k.
IteratePattern linear_pattern(i64 k);
IteratePattern make_pattern(std::vector<std::vector<i64>> polys);
/// Exact evaluation of pattern poly j at n (128-bit Horner, range-checked).
i64 pattern_power(const IteratePattern& pat, std::size_t j, i64 n);

/// Cesaro average with quarter-horizon checkpoints as a convergence diagnostic.
struct AverageReport {
    i64 N = 0;
    cplx value{0.0, 0.0};
    std::array<cplx, 4> checkpoints{};  // prefix averages at ceil(iN/4), i = 1..4
    double oscillation = 0.0;           // max pairwise distance of the checkpoints
};

/// (1/N) sum_{n<N} prod_j f_j(T^{p_j(n)} x).
AverageReport multi_average_pointwise(const SystemSpec& sys, const std::vector<Observable>& fs,
                                      const IteratePattern& pattern, const PhasePoint& x, i64 N,
                                      int threads = 1);

/// L2 norm over starting points (M-per-axis midpoint grid) of the average above.
double multi_average_L2(const SystemSpec& sys, const std::vector<Observable>& fs,
                        const IteratePattern& pattern, i64 N, i64 M, int threads = 1);

/// Entry n = 0..n_max is the measure of A cap T^-n A cap ... cap T^-kn A.
/// Exact for torus rotations with interval sets and for cyclic bit sets;
/// midpoint-grid quadrature (grid_M points per axis) for every other system.
std::vector<double> intersection_sequence(const SystemSpec& sys, const SetSpec& A, i64 k, i64 n_max,
                                          i64 grid_M = 4096, int threads = 1);

/// N^{-k} sum over n in [0,N)^k of prod_{eps != 0} f_eps(T^{eps.n} x); the 2^k - 1
/// observables are indexed by the bitmask eps - 1.
AverageReport cube_average(const SystemSpec& sys, const std::vector<Observable>& fs, i64 N,
                           const PhasePoint& x, int threads = 1);

/// The same average integrated over starting points on an M-per-axis grid.
AverageReport cube_average_integrated(const SystemSpec& sys, const std::vector<Observable>& fs, i64 N,
                                      i64 M, int threads = 1);

/// Integrated cube average with every f_eps the indicator of A, computed as
/// N^{-k} sum_n mu(intersection of T^{-eps.n} A) with exact set arithmetic
/// (torus rotations with interval sets, cyclic bit sets).
AverageReport cube_average_sets(const SystemSpec& sys, const SetSpec& A, i64 k, i64 N,
                                int threads = 1);

/// Integral over t of f1(x+t) f2(x+2t) on the rotation's torus (M-point
/// midpoint rule per axis): the limit function of the double average.
cplx kronecker_double_limit(const Observable& f1, const Observable& f2, const SystemSpec& sys,
                            const PhasePoint& x, i64 M, int threads = 1);

/// Double integral of f(s) f(s+t) f(s+2t) over the circle (M x M midpoint grid).
double roth_triple_integral(const Observable& f, const SystemSpec& sys, i64 M, int threads = 1);

/// Finite-horizon correlation comparison for a bounded scalar sequence:
/// lhs = |(1/N) sum u_n|^2,  rhs = (1/H) sum_{h<H} |average of u_{n+h} conj u_n|.
/// The asymptotic lemma makes lhs <= rhs only in the limit; both sides are
/// returned so callers can apply an explicit finite-N slack.
std::pair<double, double> vdc_check(const std::vector<cplx>& u, i64 H);
/// Same for sequences of vectors in C^d with the standard inner product.
std::pair<double, double> vdc_check_vectors(const std::vector<std::vector<cplx>>& u, i64 H);

/// (1/N) sum_n prod_j f_j(T_j^n x) for a commuting family of rotations on a
/// shared torus, integrated over x on an M-per-axis midpoint grid.
AverageReport commuting_average(const SystemSpec& family, const std::vector<Observable>& fs, i64 N,
                                i64 M, int threads = 1);

}  // namespace ergo
