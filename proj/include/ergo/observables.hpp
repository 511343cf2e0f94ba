#pragma once

#include <utility>
#include <vector>

#include "ergo/systems.hpp"

namespace ergo {

/// Union of half-open arcs [start, start+len) on the circle, endpoints on the
/// 2^-64 grid.  Canonical form: arcs sorted, disjoint, none crossing raw 0
/// (a wrapping input arc is split).  All set algebra is exact u64 arithmetic.
struct IntervalUnion {
    struct Arc {
        u64 start = 0;
        u64 len = 0;  // in (0, 2^64); start+len <= 2^64 in canonical form
    };
    std::vector<Arc> arcs;
    bool full = false;

    bool contains(TorusCoord x) const {
        if (full) return true;
        for (const Arc& a : arcs)
            if (x.raw - a.start < a.len) return true;  // wrap-safe comparison
        return false;
    }

    u128 measure_raw() const {  // total length in units of 2^-64; 2^64 means the full circle
        if (full) return u128(1) << 64;
        u128 t = 0;
        for (const Arc& a : arcs) t += a.len;
        return t;
    }

    double measure() const { return std::ldexp(static_cast<double>(measure_raw()), -64); }
    bool empty() const { return !full && arcs.empty(); }
};

/// Build from [a,b) endpoint pairs; b < a wraps around 0, b == a is empty.
IntervalUnion iu_from_pairs(const std::vector<std::pair<TorusCoord, TorusCoord>>& pairs);
IntervalUnion iu_full();
IntervalUnion iu_shift(const IntervalUnion& u, TorusCoord t);
IntervalUnion iu_intersect(const IntervalUnion& a, const IntervalUnion& b);

struct SetSpec {
    enum class Kind { TorusIntervals, CylinderProduct, BitVectorSet, FullSpace };
    Kind kind = Kind::FullSpace;
    i64 coord = 0;                         // TorusIntervals: which coordinate it constrains
    IntervalUnion intervals;               // TorusIntervals
    std::vector<IntervalUnion> cylinder;   // CylinderProduct: one factor per coordinate
    i64 modulus = 0;                       // BitVectorSet
    std::vector<bool> bits;                // BitVectorSet
};

SetSpec make_interval_set(i64 coord, IntervalUnion u);
SetSpec make_cylinder(std::vector<IntervalUnion> factors);
SetSpec make_bitvector(i64 N, const std::vector<i64>& members);
SetSpec make_full();

/// Exact membership test of a phase point (coordinates compared on the grid,
/// never through doubles).
bool set_contains(const SetSpec& s, const SystemSpec& sys, const PhasePoint& p);

/// Haar measure of the set; exact (popcounts / 2^-64 lattice lengths).
double set_measure(const SetSpec& s, const SystemSpec& sys);

/// Translate the set by t (one entry per system coordinate); measure is
/// preserved exactly.  BitVectorSet accepts a residue shift via rotate_bits.
SetSpec shift_set(const SetSpec& s, const SystemSpec& sys, const std::vector<TorusCoord>& t);
SetSpec rotate_bits(const SetSpec& s, i64 m);

SetSpec intersect_sets(const SetSpec& a, const SetSpec& b, const SystemSpec& sys);

struct Observable {
    enum class Kind { Character, TrigPoly, Indicator, Conjugate, Product, Sum, Scale };
    Kind kind = Kind::Character;
    std::vector<i64> freq;                                   // Character
    std::vector<std::pair<std::vector<i64>, cplx>> terms;    // TrigPoly
    SetSpec set;                                             // Indicator
    cplx factor{1.0, 0.0};                                   // Scale
    std::vector<Observable> children;                        // Conjugate/Product/Sum/Scale
};

Observable obs_character(std::vector<i64> freq);
Observable obs_trig(std::vector<std::pair<std::vector<i64>, cplx>> terms);
Observable obs_indicator(SetSpec s);
Observable obs_conj(Observable f);
Observable obs_product(std::vector<Observable> fs);
Observable obs_sum(std::vector<Observable> fs);
Observable obs_scale(cplx c, Observable f);
Observable obs_const(cplx c, i64 coord_count);

cplx evaluate(const Observable& f, const SystemSpec& sys, const PhasePoint& p);
double sup_norm_bound(const Observable& f);

/// Midpoint-grid Haar integral (cyclic axes summed exactly over residues).
/// Exact for trigonometric polynomials once M exceeds the largest frequency,
/// and for indicator sets whose endpoints are multiples of 1/M.
cplx haar_integral(const Observable& f, const SystemSpec& sys, i64 M, int threads = 1);

}  // namespace ergo
