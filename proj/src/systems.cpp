#include "ergo/systems.hpp"

#include <cmath>

#include "ergo/parallel.hpp"

namespace ergo {

SystemSpec make_cyclic(i64 N, i64 a) {
    if (N <= 0) throw DomainError("cyclic: N must be positive");
    SystemSpec s;
    s.kind = SystemKind::Cyclic;
    s.modulus = N;
    s.shift = ((a % N) + N) % N;
    return s;
}

SystemSpec make_rotation(std::vector<TorusCoord> alphas) {
    if (alphas.empty()) throw ShapeError("rotation: need at least one angle");
    SystemSpec s;
    s.kind = SystemKind::Rotation;
    s.alpha = std::move(alphas);
    return s;
}

SystemSpec make_skew(TorusCoord alpha, bool nil_form) {
    SystemSpec s;
    s.kind = nil_form ? SystemKind::SkewNil : SystemKind::SkewPlain;
    s.alpha = {alpha};
    return s;
}

SystemSpec make_skew3(TorusCoord alpha) {
    SystemSpec s;
    s.kind = SystemKind::Skew3;
    s.alpha = {alpha};
    return s;
}

SystemSpec make_heisenberg(TorusCoord a1, TorusCoord a2, TorusCoord a3) {
    SystemSpec s;
    s.kind = SystemKind::Heisenberg;
    s.translation = {a1, a2, a3};
    return s;
}

SystemSpec make_product(std::vector<SystemSpec> parts) {
    if (parts.empty()) throw ShapeError("product: need at least one component");
    SystemSpec s;
    s.kind = SystemKind::Product;
    s.components = std::move(parts);
    return s;
}

SystemSpec make_commuting(std::vector<SystemSpec> rotations) {
    if (rotations.empty()) throw ShapeError("commuting: need at least one member");
    const std::size_t d = rotations.front().alpha.size();
    for (const auto& r : rotations) {
        if (r.kind != SystemKind::Rotation) throw ShapeError("commuting: members must be torus rotations");
        if (r.alpha.size() != d) throw ShapeError("commuting: members must share the same torus dimension");
    }
    SystemSpec s;
    s.kind = SystemKind::Commuting;
    s.components = std::move(rotations);
    return s;
}

i64 coord_count(const SystemSpec& sys) {
    switch (sys.kind) {
        case SystemKind::Cyclic: return 1;
        case SystemKind::Rotation: return static_cast<i64>(sys.alpha.size());
        case SystemKind::SkewPlain:
        case SystemKind::SkewNil: return 2;
        case SystemKind::Skew3: return 3;
        case SystemKind::Heisenberg: return 3;
        case SystemKind::Product: {
            i64 n = 0;
            for (const auto& c : sys.components) n += coord_count(c);
            return n;
        }
        case SystemKind::Commuting: return static_cast<i64>(sys.components.front().alpha.size());
    }
    throw DomainError("coord_count: bad kind");
}

PhasePoint cyclic_point(i64 N, i64 r) {
    if (N <= 0) throw DomainError("cyclic_point: N must be positive");
    PhasePoint p;
    p.kind = SystemKind::Cyclic;
    p.residue = ((r % N) + N) % N;
    return p;
}

PhasePoint torus_point(std::vector<TorusCoord> coords) {
    PhasePoint p;
    p.kind = SystemKind::Rotation;
    p.t = std::move(coords);
    return p;
}

PhasePoint skew_point(TorusCoord x, TorusCoord y, bool nil_form) {
    PhasePoint p;
    p.kind = nil_form ? SystemKind::SkewNil : SystemKind::SkewPlain;
    p.t = {x, y};
    return p;
}

PhasePoint skew3_point(TorusCoord x, TorusCoord y, TorusCoord z) {
    PhasePoint p;
    p.kind = SystemKind::Skew3;
    p.t = {x, y, z};
    return p;
}

PhasePoint heis_point(TorusCoord x, TorusCoord y, Frac128 z) {
    PhasePoint p;
    p.kind = SystemKind::Heisenberg;
    p.t = {x, y};
    p.heis_z = z;
    return p;
}

PhasePoint product_point(std::vector<PhasePoint> parts) {
    PhasePoint p;
    p.kind = SystemKind::Product;
    p.parts = std::move(parts);
    return p;
}

void validate_point(const SystemSpec& sys, const PhasePoint& p) {
    auto fail = [] { throw ShapeError("point does not match system phase space"); };
    switch (sys.kind) {
        case SystemKind::Cyclic:
            if (p.kind != SystemKind::Cyclic || p.residue < 0 || p.residue >= sys.modulus) fail();
            return;
        case SystemKind::Rotation:
        case SystemKind::Commuting: {
            const std::size_t d = sys.kind == SystemKind::Rotation ? sys.alpha.size()
                                                                   : sys.components.front().alpha.size();
            if (p.kind != SystemKind::Rotation || p.t.size() != d) fail();
            return;
        }
        case SystemKind::SkewPlain:
        case SystemKind::SkewNil:
            if ((p.kind != SystemKind::SkewPlain && p.kind != SystemKind::SkewNil) || p.t.size() != 2) fail();
            return;
        case SystemKind::Skew3:
            if (p.kind != SystemKind::Skew3 || p.t.size() != 3) fail();
            return;
        case SystemKind::Heisenberg:
            if (p.kind != SystemKind::Heisenberg || p.t.size() != 2) fail();
            return;
        case SystemKind::Product:
            if (p.kind != SystemKind::Product || p.parts.size() != sys.components.size()) fail();
            for (std::size_t i = 0; i < p.parts.size(); ++i) validate_point(sys.components[i], p.parts[i]);
            return;
    }
    fail();
}

void append_coords(const PhasePoint& p, const SystemSpec& sys, std::vector<double>& out) {
    switch (sys.kind) {
        case SystemKind::Cyclic:
            out.push_back(static_cast<double>(p.residue) / static_cast<double>(sys.modulus));
            return;
        case SystemKind::Heisenberg:
            out.push_back(p.t[0].to_real());
            out.push_back(p.t[1].to_real());
            out.push_back(p.heis_z.to_real());
            return;
        case SystemKind::Product:
            for (std::size_t i = 0; i < p.parts.size(); ++i) append_coords(p.parts[i], sys.components[i], out);
            return;
        default:
            for (TorusCoord c : p.t) out.push_back(c.to_real());
            return;
    }
}

std::vector<double> coords(const PhasePoint& p, const SystemSpec& sys) {
    validate_point(sys, p);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(coord_count(sys)));
    append_coords(p, sys, out);
    return out;
}

// --- dynamics ---------------------------------------------------------------

namespace {

// Heisenberg one-step: canonical representative of a * p, where a = (a1,a2,a3)
// has entries in [0,1) and p = (x, y, z) is canonical.  Raw product:
//   (a1+x, a2+y, a3+z+a1*y).
// Reducing the x coordinate uses a lattice element (k,0,0), which never touches
// z; reducing y by (0,-ky,0) adds -ky * x_new to z (group law: right factor's
// y enters z through the left factor's x).  ky here is the carry of a2+y.
PhasePoint heis_step(const SystemSpec& sys, const PhasePoint& p) {
    const TorusCoord a1 = sys.translation[0], a2 = sys.translation[1], a3 = sys.translation[2];
    const TorusCoord px = p.t[0], py = p.t[1];
    TorusCoord x_new = a1 + px;
    u64 ysum = a2.raw + py.raw;
    const bool carry = ysum < a2.raw;
    TorusCoord y_new{ysum};
    Frac128 z = Frac128::from_coord(a3) + p.heis_z + exact_product(a1, py);
    if (carry) z = z - Frac128::from_coord(x_new);
    return heis_point(x_new, y_new, z);
}

// Heisenberg closed form.  a^n = (n a1, n a2, n a3 + C(n,2) a1 a2) as a group
// element; left-multiplying p and canonicalizing gives
//   x* = {n a1 + x},  y* = {n a2 + y},
//   z* = {n a3 + C(n,2) a1 a2 + z + n*(a1 y) - ky x*},  ky = floor(n a2 + y).
// Every term lies on the 2^-64 or 2^-128 grid, so this matches n-fold stepping
// bit for bit.
PhasePoint heis_iterate(const SystemSpec& sys, const PhasePoint& p, i64 n) {
    const TorusCoord a1 = sys.translation[0], a2 = sys.translation[1], a3 = sys.translation[2];
    const TorusCoord px = p.t[0], py = p.t[1];
    if (n > (i64(1) << 62) || n < -(i64(1) << 62)) throw GuardError("iterate: |n| too large");
    TorusCoord x_new = n * a1 + px;
    TorusCoord y_new = n * a2 + py;
    // ky = floor(n * a2 + y) over the reals, computed exactly in 128-bit.
    i128 ytotal = i128(n) * i128(a2.raw) + i128(u64(py.raw));
    i64 ky = checked_i64(ytotal >> 64, "heis_iterate carry");  // arithmetic shift = floor div 2^64
    Frac128 z = n * Frac128::from_coord(a3) + binom2(n) * exact_product(a1, a2) + p.heis_z +
                n * exact_product(a1, py) - ky * Frac128::from_coord(x_new);
    return heis_point(x_new, y_new, z);
}

}  // namespace

PhasePoint step(const SystemSpec& sys, const PhasePoint& p) {
    validate_point(sys, p);
    switch (sys.kind) {
        case SystemKind::Cyclic: {
            PhasePoint q = p;
            q.residue = (p.residue + sys.shift) % sys.modulus;
            return q;
        }
        case SystemKind::Rotation: {
            PhasePoint q = p;
            for (std::size_t i = 0; i < q.t.size(); ++i) q.t[i] = q.t[i] + sys.alpha[i];
            return q;
        }
        case SystemKind::SkewPlain: {
            PhasePoint q = p;
            q.t[0] = p.t[0] + sys.alpha[0];
            q.t[1] = p.t[1] + p.t[0];
            return q;
        }
        case SystemKind::SkewNil: {
            PhasePoint q = p;
            q.t[0] = p.t[0] + sys.alpha[0];
            q.t[1] = p.t[1] + p.t[0] + p.t[0] + sys.alpha[0];
            return q;
        }
        case SystemKind::Skew3: {
            PhasePoint q = p;
            q.t[0] = p.t[0] + sys.alpha[0];
            q.t[1] = p.t[1] + p.t[0];
            q.t[2] = p.t[2] + p.t[1];
            return q;
        }
        case SystemKind::Heisenberg:
            return heis_step(sys, p);
        case SystemKind::Product: {
            PhasePoint q = p;
            for (std::size_t i = 0; i < q.parts.size(); ++i) q.parts[i] = step(sys.components[i], p.parts[i]);
            return q;
        }
        case SystemKind::Commuting:
            throw CapabilityError("step: a commuting family is not a single transformation");
    }
    throw DomainError("step: bad kind");
}

PhasePoint iterate(const SystemSpec& sys, const PhasePoint& p, i64 n) {
    validate_point(sys, p);
    switch (sys.kind) {
        case SystemKind::Cyclic: {
            PhasePoint q = p;
            i128 r = i128(p.residue) + i128(n % sys.modulus) * sys.shift;
            i64 m = static_cast<i64>(r % sys.modulus);
            q.residue = (m + sys.modulus) % sys.modulus;
            return q;
        }
        case SystemKind::Rotation: {
            PhasePoint q = p;
            for (std::size_t i = 0; i < q.t.size(); ++i) q.t[i] = n * sys.alpha[i] + q.t[i];
            return q;
        }
        case SystemKind::SkewPlain: {
            // T^n (x,y) = (x + n a, y + n x + C(n,2) a)
            PhasePoint q = p;
            q.t[0] = n * sys.alpha[0] + p.t[0];
            q.t[1] = p.t[1] + n * p.t[0] + binom2(n) * sys.alpha[0];
            return q;
        }
        case SystemKind::SkewNil: {
            // T^n (x,y) = (x + n a, y + 2 n x + n^2 a)
            PhasePoint q = p;
            q.t[0] = n * sys.alpha[0] + p.t[0];
            q.t[1] = p.t[1] + (2 * n) * p.t[0] + checked_i64(i128(n) * n, "iterate") * sys.alpha[0];
            return q;
        }
        case SystemKind::Skew3: {
            // T^n (x,y,z) = (x + n a, y + n x + C(n,2) a, z + n y + C(n,2) x + C(n,3) a)
            PhasePoint q = p;
            q.t[0] = n * sys.alpha[0] + p.t[0];
            q.t[1] = p.t[1] + n * p.t[0] + binom2(n) * sys.alpha[0];
            q.t[2] = p.t[2] + n * p.t[1] + binom2(n) * p.t[0] + binom3(n) * sys.alpha[0];
            return q;
        }
        case SystemKind::Heisenberg:
            return heis_iterate(sys, p, n);
        case SystemKind::Product: {
            PhasePoint q = p;
            for (std::size_t i = 0; i < q.parts.size(); ++i) q.parts[i] = iterate(sys.components[i], p.parts[i], n);
            return q;
        }
        case SystemKind::Commuting:
            throw CapabilityError("iterate: a commuting family is not a single transformation");
    }
    throw DomainError("iterate: bad kind");
}

HeisRat canonicalize_heis(const HeisRat& g) {
    auto floor_rat = [](Rat64 r) -> i64 {
        i64 q = r.num / r.den;
        if (r.num % r.den != 0 && r.num < 0) --q;
        return q;
    };
    Rat64 x = g.x, y = g.y, z = g.z;
    i64 kx = floor_rat(x);
    x = x - Rat64(kx);               // right-multiply by (-kx, 0, 0): z untouched
    i64 ky = floor_rat(y);
    y = y - Rat64(ky);
    z = z - scale(ky, x);            // right-multiply by (0, -ky, 0): z += x * (-ky)
    i64 kz = floor_rat(z);
    z = z - Rat64(kz);               // right-multiply by (0, 0, -kz)
    return HeisRat{x, y, z};
}

cplx weyl_sum(const SystemSpec& sys, const std::vector<i64>& xi, const PhasePoint& p, i64 N, int threads) {
    validate_point(sys, p);
    if (static_cast<i64>(xi.size()) != coord_count(sys)) throw ShapeError("weyl_sum: frequency vector has wrong length");
    if (N <= 0) throw DomainError("weyl_sum: N must be positive");
    cplx total = det_sum<cplx>(
        N,
        [&](i64 n) {
            PhasePoint q = iterate(sys, p, n);
            std::vector<double> c;
            append_coords(q, sys, c);
            double phase = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) phase += static_cast<double>(xi[i]) * c[i];
            phase -= std::floor(phase);
            return unit_phase(phase);
        },
        threads);
    return total / static_cast<double>(N);
}

std::vector<i64> grid_axis_sizes(const SystemSpec& sys, i64 M) {
    if (M <= 0) throw DomainError("grid: M must be positive");
    switch (sys.kind) {
        case SystemKind::Cyclic: return {sys.modulus};
        case SystemKind::Rotation: return std::vector<i64>(sys.alpha.size(), M);
        case SystemKind::SkewPlain:
        case SystemKind::SkewNil: return {M, M};
        case SystemKind::Skew3: return {M, M, M};
        case SystemKind::Heisenberg: return {M, M, M};
        case SystemKind::Commuting: return std::vector<i64>(sys.components.front().alpha.size(), M);
        case SystemKind::Product: {
            std::vector<i64> out;
            for (const auto& c : sys.components) {
                auto sub = grid_axis_sizes(c, M);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
    }
    throw DomainError("grid_axis_sizes: bad kind");
}

i64 grid_total(const SystemSpec& sys, i64 M) {
    i128 total = 1;
    for (i64 s : grid_axis_sizes(sys, M)) {
        total *= s;
        if (total > (i64(1) << 26)) throw GuardError("grid too fine: total cell count exceeds 2^26");
    }
    return static_cast<i64>(total);
}

namespace {
TorusCoord midpoint(i64 i, i64 M) { return coord_from_fraction(2 * i + 1, 2 * M); }

PhasePoint point_from_axes_rec(const SystemSpec& sys, const std::vector<i64>& idx, std::size_t& pos, i64 M) {
    switch (sys.kind) {
        case SystemKind::Cyclic: return cyclic_point(sys.modulus, idx.at(pos++));
        case SystemKind::Rotation:
        case SystemKind::Commuting: {
            const std::size_t d = sys.kind == SystemKind::Rotation ? sys.alpha.size()
                                                                   : sys.components.front().alpha.size();
            std::vector<TorusCoord> c(d);
            for (std::size_t i = 0; i < d; ++i) c[i] = midpoint(idx.at(pos++), M);
            return torus_point(std::move(c));
        }
        case SystemKind::SkewPlain:
        case SystemKind::SkewNil: {
            TorusCoord x = midpoint(idx.at(pos++), M), y = midpoint(idx.at(pos++), M);
            return skew_point(x, y, sys.kind == SystemKind::SkewNil);
        }
        case SystemKind::Skew3: {
            TorusCoord x = midpoint(idx.at(pos++), M), y = midpoint(idx.at(pos++), M), z = midpoint(idx.at(pos++), M);
            return skew3_point(x, y, z);
        }
        case SystemKind::Heisenberg: {
            TorusCoord x = midpoint(idx.at(pos++), M), y = midpoint(idx.at(pos++), M), z = midpoint(idx.at(pos++), M);
            return heis_point(x, y, Frac128::from_coord(z));
        }
        case SystemKind::Product: {
            std::vector<PhasePoint> parts;
            parts.reserve(sys.components.size());
            for (const auto& c : sys.components) parts.push_back(point_from_axes_rec(c, idx, pos, M));
            return product_point(std::move(parts));
        }
    }
    throw DomainError("point_from_axes: bad kind");
}
}  // namespace

PhasePoint point_from_axes(const SystemSpec& sys, const std::vector<i64>& idx, i64 M) {
    std::size_t pos = 0;
    PhasePoint p = point_from_axes_rec(sys, idx, pos, M);
    if (pos != idx.size()) throw ShapeError("point_from_axes: index vector has wrong length");
    return p;
}

}  // namespace ergo
