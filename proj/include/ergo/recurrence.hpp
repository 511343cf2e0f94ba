#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/combinatorics.hpp"
#include "ergo/observables.hpp"
#include "ergo/systems.hpp"

namespace ergo {

/// Smallest n in [1, horizon] with mu(A cap T^-n A) > 0, or nullopt if no such
/// n exists within the horizon.  Exact set arithmetic for torus rotations with
/// interval sets and cyclic bit sets; midpoint-grid quadrature (grid_M points
/// per torus axis) elsewhere, where "positive" means some grid cell lies in
/// both sets.  A return is guaranteed once the horizon is large enough
/// relative to 1/mu(A); the function reports what it finds and never assumes
/// this.  Throws DomainError when mu(A) = 0 or horizon < 1.
std::optional<i64> poincare_first_return(const SystemSpec& sys, const SetSpec& A, i64 horizon,
                                         i64 grid_M = 4096);

/// Scan of the intersection sequence against a multiple-recurrence threshold.
struct ScanReport {
    i64 k = 1;                 // intersections A cap T^-n A cap ... cap T^-kn A
    double threshold = 0.0;    // mu(A)^(k+1) - eps
    i64 horizon = 0;           // n ranges over [1, horizon]
    IntegerWindowSet good_set; // window [0, horizon+1); members are the good n
    i64 max_gap = 0;           // largest gap of good_set inside [1, horizon]
    std::vector<double> values;  // values[n] = mu(A cap ... cap T^-kn A), n = 0..horizon
};

/// Marks every n in [1, horizon] whose k-fold intersection measure exceeds
/// mu(A)^(k+1) - eps.  k must be 1, 2, or 3 (DomainError otherwise); eps may
/// make the threshold negative, in which case every n is good.  max_gap counts
/// the first good n from 1, consecutive differences, and the tail to horizon.
ScanReport khintchine_scan(const SystemSpec& sys, const SetSpec& A, i64 k, double eps, i64 horizon,
                           i64 grid_M = 4096, int threads = 1);

/// Exact analysis of the skew product (x, y) -> (x, y + x) against the target
/// A = T x B, where B packs one sub-interval of length 1/(4L) into each slot
/// j/(2L) for j in a 3-term-progression-free set E in [0, L).  Every quantity
/// below is computed in integer arithmetic on the 1/(8L) lattice and converted
/// to double once.
struct CounterexampleReport {
    i64 L = 0;
    i64 set_size = 0;             // |E|
    double m_B = 0.0;             // measure of B = set_size / (4L)
    double mu_A = 0.0;            // = m_B (A is a full cylinder over B)
    double integral_value = 0.0;  // mu(A cap T^-n A cap T^-2n A), n-independent
    i64 lattice_count = 0;        // integer numerator of integral_value over (8L)^2
    double sup_intersection = 0.0;  // max over n in [1, sup_horizon] of the direct values
    std::vector<double> direct_values;  // entry n-1 = directly computed value at n
    i64 sup_horizon = 0;
    double bound = 0.0;           // m_B / (4L), the proven upper bound
    i64 best_ell = 0;             // largest l with sup_intersection <= mu_A^l / 2 (0 if none)
};

/// Builds the report above with E = behrend_set(L).  The direct value at each
/// n integrates over its own refinement of the lattice, so the invariance
/// sup = integral is a computed fact, not an algebraic shortcut.
/// Throws DomainError for L < 2 and GuardError when the lattice work
/// (64 L^2 * sup_horizon^2 in the worst case) would exceed 2^32 cells.
CounterexampleReport triple_counterexample(i64 L, i64 sup_horizon = 64);

/// Correlation sequence I(k, n) = integral of conj(f) * (f o T^n) * (f o T^2n)
/// * ... * (f o T^kn).  The leading conjugate makes I(1, .) the Fourier
/// coefficient sequence of a positive measure; for real f it is invisible.
struct MulticorrelationSeries {
    i64 k = 1;
    std::vector<cplx> values;  // values[n] = I(k, n), n = 0..n_max
    std::string system_kind;
    std::string observable_kind;
};

/// Single value I(k, n); n may be negative.  Indicator observables on torus
/// rotations and cyclic bit sets use exact set arithmetic; everything else is
/// a midpoint-grid quadrature with M points per torus axis (exact for
/// trigonometric polynomials once M exceeds the total frequency spread).
cplx multicorrelation_at(const SystemSpec& sys, const Observable& f, i64 k, i64 n,
                         i64 M = 256, int threads = 1);

/// The series n = 0..n_max of the above, sharing one dispatch.
MulticorrelationSeries multicorrelation(const SystemSpec& sys, const Observable& f, i64 k, i64 n_max,
                                        i64 M = 256, int threads = 1);

struct SpectralAtom {
    double frequency = 0.0;  // in [0, 1)
    double weight = 0.0;     // >= 0
};

/// Spectral measure of f under T restricted to order-1 correlations:
/// I(1, n) = sum over atoms of weight * e(n * frequency) + continuous part.
struct SpectralMeasure {
    std::vector<SpectralAtom> atoms;  // sorted by weight, largest first
    double continuous_part_mass = 0.0;
    double total_mass = 0.0;  // = I(1, 0)
};

/// Exact path: the observable is reduced to its trigonometric expansion
/// (Character / TrigPoly / Sum / Scale / Conjugate / Product of such), the
/// system must be a torus rotation, and each expansion frequency xi
/// contributes an atom at the fractional part of <xi, alpha> with weight
/// |coefficient|^2 (coefficients sharing a frequency are combined first,
/// atoms sharing a spectral frequency are merged).  The continuous part is
/// exactly zero.  Throws CapabilityError for indicator observables or
/// non-rotation systems.
SpectralMeasure spectral_decompose_k1(const SystemSpec& sys, const Observable& f);

/// Empirical path: the input is the window I(1, 0..W-1).  Atoms are the
/// locally maximal discrete-Fourier bins whose magnitude exceeds
/// peak_factor times the median bin magnitude, each refined by a local
/// search that maximizes |(1/W) sum_n values[n] e(-n theta)|; the refined
/// magnitude is the weight.  continuous_part_mass = max(0, I(1,0) - sum of
/// weights).  Throws ShapeError for windows shorter than 8.
SpectralMeasure spectral_decompose_k1(const std::vector<cplx>& series, double peak_factor = 3.0);

}  // namespace ergo
