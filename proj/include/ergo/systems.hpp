#pragma once

#include <array>
#include <vector>

#include "ergo/common.hpp"
#include "ergo/fixedpoint.hpp"
#include "ergo/heisenberg.hpp"

namespace ergo {

enum class SystemKind {
    Cyclic,       // Z/NZ, x -> x + a
    Rotation,     // T^d, x -> x + alpha
    SkewPlain,    // T^2, (x,y) -> (x+alpha, y+x)
    SkewNil,      // T^2, (x,y) -> (x+alpha, y+2x+alpha)
    Skew3,        // T^3, (x,y,z) -> (x+alpha, y+x, z+y)
    Heisenberg,   // nilmanifold G/Gamma, left translation by (a1,a2,a3)
    Product,      // direct product of component systems
    Commuting,    // family of torus rotations sharing one torus (not a single map)
};

struct SystemSpec {
    SystemKind kind = SystemKind::Rotation;
    i64 modulus = 0;                    // Cyclic: N
    i64 shift = 0;                      // Cyclic: a
    std::vector<TorusCoord> alpha;      // Rotation: d entries; Skew*/Skew3: one entry
    std::array<TorusCoord, 3> translation{};  // Heisenberg: (a1,a2,a3), each in [0,1)
    std::vector<SystemSpec> components; // Product: parts; Commuting: members (all Rotation, same d)
};

SystemSpec make_cyclic(i64 N, i64 a);
SystemSpec make_rotation(std::vector<TorusCoord> alphas);
SystemSpec make_skew(TorusCoord alpha, bool nil_form);
SystemSpec make_skew3(TorusCoord alpha);
SystemSpec make_heisenberg(TorusCoord a1, TorusCoord a2, TorusCoord a3);
SystemSpec make_product(std::vector<SystemSpec> parts);
SystemSpec make_commuting(std::vector<SystemSpec> rotations);

// Number of real coordinates a point of the system exposes to observables.
i64 coord_count(const SystemSpec& sys);

struct PhasePoint {
    SystemKind kind = SystemKind::Rotation;
    i64 residue = 0;                 // Cyclic
    std::vector<TorusCoord> t;       // torus coordinates (Rotation d / Skew 2 / Skew3 3 / Heisenberg x,y)
    Frac128 heis_z{};                // Heisenberg z, kept on the 2^-128 grid so orbit arithmetic stays exact
    std::vector<PhasePoint> parts;   // Product
};

PhasePoint cyclic_point(i64 N, i64 r);
PhasePoint torus_point(std::vector<TorusCoord> coords);            // Rotation/Commuting
PhasePoint skew_point(TorusCoord x, TorusCoord y, bool nil_form);
PhasePoint skew3_point(TorusCoord x, TorusCoord y, TorusCoord z);
PhasePoint heis_point(TorusCoord x, TorusCoord y, Frac128 z);
PhasePoint product_point(std::vector<PhasePoint> parts);

// Throws ShapeError if p does not belong to sys's phase space.
void validate_point(const SystemSpec& sys, const PhasePoint& p);

// Real coordinates in [0,1) (Cyclic contributes r/N), concatenated over products.
void append_coords(const PhasePoint& p, const SystemSpec& sys, std::vector<double>& out);
std::vector<double> coords(const PhasePoint& p, const SystemSpec& sys);

/// One application of the transformation.  Exact: every update is lattice
/// arithmetic mod 1 (or mod N), including the nilmanifold coset reduction.
PhasePoint step(const SystemSpec& sys, const PhasePoint& p);

/// T^n p in closed form, in constant time in n, bit-identical to n-fold step.
/// Negative n inverts (all catalog maps are invertible).
PhasePoint iterate(const SystemSpec& sys, const PhasePoint& p, i64 n);

/// Canonical coset representative of a raw Heisenberg group element, reducing
/// x, then y, then z by right multiplication with integer lattice elements.
/// The y-reduction by (0,-k,0) changes z by -k*x; the order is part of the
/// contract and pinned by tests.
HeisRat canonicalize_heis(const HeisRat& g);

/// (1/N) sum_{n<N} e(2 pi i <xi, coords(T^n p)>); the equidistribution probe.
cplx weyl_sum(const SystemSpec& sys, const std::vector<i64>& xi, const PhasePoint& p, i64 N, int threads = 1);

/// Uniform product grid over the phase space: sizes per axis (cyclic axes use
/// their own modulus, torus axes use M midpoints).  Guarded by total size.
std::vector<i64> grid_axis_sizes(const SystemSpec& sys, i64 M);
PhasePoint point_from_axes(const SystemSpec& sys, const std::vector<i64>& idx, i64 M);
i64 grid_total(const SystemSpec& sys, i64 M);  // throws GuardError beyond 1<<26

}  // namespace ergo
