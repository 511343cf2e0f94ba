#include "ergo/observables.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/parallel.hpp"

namespace ergo {

// --- interval unions ---------------------------------------------------------

namespace {

// Canonicalize a list of non-wrapping segments [s, e) with e <= 2^64 (u128):
// sort, merge overlapping or touching, convert back to arcs.
IntervalUnion canonicalize_segments(std::vector<std::pair<u128, u128>> segs) {
    IntervalUnion out;
    std::sort(segs.begin(), segs.end());
    std::vector<std::pair<u128, u128>> merged;
    for (auto& s : segs) {
        if (s.first == s.second) continue;
        if (!merged.empty() && s.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, s.second);
        else
            merged.push_back(s);
    }
    u128 total = 0;
    for (auto& s : merged) total += s.second - s.first;
    if (total >= (u128(1) << 64)) {
        out.full = true;
        return out;
    }
    for (auto& s : merged)
        out.arcs.push_back({static_cast<u64>(s.first), static_cast<u64>(s.second - s.first)});
    return out;
}

std::vector<std::pair<u128, u128>> to_segments(const IntervalUnion& u) {
    std::vector<std::pair<u128, u128>> segs;
    for (const auto& a : u.arcs) segs.emplace_back(u128(a.start), u128(a.start) + a.len);
    return segs;
}

}  // namespace

IntervalUnion iu_from_pairs(const std::vector<std::pair<TorusCoord, TorusCoord>>& pairs) {
    std::vector<std::pair<u128, u128>> segs;
    for (auto& [a, b] : pairs) {
        if (a.raw == b.raw) continue;  // empty by convention
        if (a.raw < b.raw) {
            segs.emplace_back(a.raw, b.raw);
        } else {  // wraps through 0
            segs.emplace_back(u128(a.raw), u128(1) << 64);
            segs.emplace_back(0, b.raw);
        }
    }
    return canonicalize_segments(std::move(segs));
}

IntervalUnion iu_full() {
    IntervalUnion u;
    u.full = true;
    return u;
}

IntervalUnion iu_shift(const IntervalUnion& u, TorusCoord t) {
    if (u.full) return u;
    std::vector<std::pair<u128, u128>> segs;
    for (const auto& a : u.arcs) {
        u64 s = a.start + t.raw;  // wraps mod 2^64
        u128 end = u128(s) + a.len;
        if (end <= (u128(1) << 64)) {
            segs.emplace_back(s, end);
        } else {
            segs.emplace_back(u128(s), u128(1) << 64);
            segs.emplace_back(0, end - (u128(1) << 64));
        }
    }
    return canonicalize_segments(std::move(segs));
}

IntervalUnion iu_intersect(const IntervalUnion& a, const IntervalUnion& b) {
    if (a.full) return b;
    if (b.full) return a;
    auto sa = to_segments(a), sb = to_segments(b);
    std::vector<std::pair<u128, u128>> out;
    std::size_t i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        u128 lo = std::max(sa[i].first, sb[j].first);
        u128 hi = std::min(sa[i].second, sb[j].second);
        if (lo < hi) out.emplace_back(lo, hi);
        if (sa[i].second < sb[j].second)
            ++i;
        else
            ++j;
    }
    return canonicalize_segments(std::move(out));
}

// --- set specs ----------------------------------------------------------------

SetSpec make_interval_set(i64 coord, IntervalUnion u) {
    if (coord < 0) throw ShapeError("interval set: negative coordinate index");
    SetSpec s;
    s.kind = SetSpec::Kind::TorusIntervals;
    s.coord = coord;
    s.intervals = std::move(u);
    return s;
}

SetSpec make_cylinder(std::vector<IntervalUnion> factors) {
    if (factors.empty()) throw ShapeError("cylinder: need at least one factor");
    SetSpec s;
    s.kind = SetSpec::Kind::CylinderProduct;
    s.cylinder = std::move(factors);
    return s;
}

SetSpec make_bitvector(i64 N, const std::vector<i64>& members) {
    if (N <= 0) throw DomainError("bitvector: N must be positive");
    SetSpec s;
    s.kind = SetSpec::Kind::BitVectorSet;
    s.modulus = N;
    s.bits.assign(static_cast<std::size_t>(N), false);
    for (i64 m : members) {
        if (m < 0 || m >= N) throw DomainError("bitvector: member out of range");
        s.bits[static_cast<std::size_t>(m)] = true;
    }
    return s;
}

SetSpec make_full() { return SetSpec{}; }

namespace {

// Exact per-coordinate raw values: torus coords as-is, cyclic residue as the
// grid point r/N (exactly rounded), nil z truncated to its top 64 bits (exact
// for membership in intervals with 2^-64 endpoints).
void append_raw_coords(const PhasePoint& p, const SystemSpec& sys, std::vector<TorusCoord>& out) {
    switch (sys.kind) {
        case SystemKind::Cyclic:
            out.push_back(coord_from_fraction(p.residue, sys.modulus));
            return;
        case SystemKind::Heisenberg:
            out.push_back(p.t[0]);
            out.push_back(p.t[1]);
            out.push_back(TorusCoord{static_cast<u64>(p.heis_z.raw >> 64)});
            return;
        case SystemKind::Product:
            for (std::size_t i = 0; i < p.parts.size(); ++i) append_raw_coords(p.parts[i], sys.components[i], out);
            return;
        default:
            for (TorusCoord c : p.t) out.push_back(c);
            return;
    }
}

}  // namespace

bool set_contains(const SetSpec& s, const SystemSpec& sys, const PhasePoint& p) {
    switch (s.kind) {
        case SetSpec::Kind::FullSpace:
            return true;
        case SetSpec::Kind::BitVectorSet: {
            if (sys.kind != SystemKind::Cyclic) throw CapabilityError("bitvector set needs a cyclic system");
            if (sys.modulus != s.modulus) throw ShapeError("bitvector set: modulus mismatch");
            return s.bits[static_cast<std::size_t>(p.residue)];
        }
        case SetSpec::Kind::TorusIntervals: {
            std::vector<TorusCoord> c;
            append_raw_coords(p, sys, c);
            if (s.coord >= static_cast<i64>(c.size())) throw ShapeError("interval set: coordinate out of range");
            return s.intervals.contains(c[static_cast<std::size_t>(s.coord)]);
        }
        case SetSpec::Kind::CylinderProduct: {
            std::vector<TorusCoord> c;
            append_raw_coords(p, sys, c);
            if (s.cylinder.size() != c.size()) throw ShapeError("cylinder set: coordinate count mismatch");
            for (std::size_t i = 0; i < c.size(); ++i)
                if (!s.cylinder[i].contains(c[i])) return false;
            return true;
        }
    }
    throw DomainError("set_contains: bad kind");
}

double set_measure(const SetSpec& s, const SystemSpec& sys) {
    switch (s.kind) {
        case SetSpec::Kind::FullSpace:
            return 1.0;
        case SetSpec::Kind::BitVectorSet: {
            if (sys.kind != SystemKind::Cyclic || sys.modulus != s.modulus)
                throw CapabilityError("bitvector set measure needs the matching cyclic system");
            i64 pop = 0;
            for (bool b : s.bits) pop += b ? 1 : 0;
            return static_cast<double>(pop) / static_cast<double>(s.modulus);
        }
        case SetSpec::Kind::TorusIntervals:
            return s.intervals.measure();
        case SetSpec::Kind::CylinderProduct: {
            double m = 1.0;
            for (const auto& u : s.cylinder) m *= u.measure();
            return m;
        }
    }
    throw DomainError("set_measure: bad kind");
}

SetSpec shift_set(const SetSpec& s, const SystemSpec& sys, const std::vector<TorusCoord>& t) {
    if (static_cast<i64>(t.size()) != coord_count(sys)) throw ShapeError("shift_set: translation has wrong length");
    SetSpec out = s;
    switch (s.kind) {
        case SetSpec::Kind::FullSpace:
            return out;
        case SetSpec::Kind::TorusIntervals:
            out.intervals = iu_shift(s.intervals, t[static_cast<std::size_t>(s.coord)]);
            return out;
        case SetSpec::Kind::CylinderProduct: {
            if (s.cylinder.size() != t.size()) throw ShapeError("shift_set: cylinder arity mismatch");
            for (std::size_t i = 0; i < t.size(); ++i) out.cylinder[i] = iu_shift(s.cylinder[i], t[i]);
            return out;
        }
        case SetSpec::Kind::BitVectorSet:
            throw CapabilityError("shift_set: use rotate_bits for cyclic bit sets");
    }
    throw DomainError("shift_set: bad kind");
}

SetSpec rotate_bits(const SetSpec& s, i64 m) {
    if (s.kind != SetSpec::Kind::BitVectorSet) throw CapabilityError("rotate_bits: not a bit set");
    SetSpec out = s;
    const i64 N = s.modulus;
    i64 shift = ((m % N) + N) % N;
    for (i64 i = 0; i < N; ++i)
        out.bits[static_cast<std::size_t>((i + shift) % N)] = s.bits[static_cast<std::size_t>(i)];
    return out;
}

SetSpec intersect_sets(const SetSpec& a, const SetSpec& b, const SystemSpec& sys) {
    if (a.kind == SetSpec::Kind::FullSpace) return b;
    if (b.kind == SetSpec::Kind::FullSpace) return a;
    if (a.kind == SetSpec::Kind::BitVectorSet && b.kind == SetSpec::Kind::BitVectorSet) {
        if (a.modulus != b.modulus) throw ShapeError("intersect_sets: modulus mismatch");
        SetSpec out = a;
        for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = out.bits[i] && b.bits[i];
        return out;
    }
    const i64 d = coord_count(sys);
    auto as_cylinder = [&](const SetSpec& s) -> std::vector<IntervalUnion> {
        std::vector<IntervalUnion> c(static_cast<std::size_t>(d), iu_full());
        if (s.kind == SetSpec::Kind::TorusIntervals) {
            if (s.coord >= d) throw ShapeError("intersect_sets: coordinate out of range");
            c[static_cast<std::size_t>(s.coord)] = s.intervals;
        } else if (s.kind == SetSpec::Kind::CylinderProduct) {
            if (static_cast<i64>(s.cylinder.size()) != d) throw ShapeError("intersect_sets: cylinder arity mismatch");
            c = s.cylinder;
        } else {
            throw CapabilityError("intersect_sets: incompatible set kinds");
        }
        return c;
    };
    auto ca = as_cylinder(a), cb = as_cylinder(b);
    std::vector<IntervalUnion> out(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = iu_intersect(ca[i], cb[i]);
    if (d == 1) return make_interval_set(0, out[0]);
    return make_cylinder(std::move(out));
}

// --- observables ----------------------------------------------------------------

Observable obs_character(std::vector<i64> freq) {
    Observable f;
    f.kind = Observable::Kind::Character;
    f.freq = std::move(freq);
    return f;
}

Observable obs_trig(std::vector<std::pair<std::vector<i64>, cplx>> terms) {
    if (terms.empty()) throw ShapeError("trig poly: need at least one term");
    const std::size_t d = terms.front().first.size();
    for (auto& t : terms)
        if (t.first.size() != d) throw ShapeError("trig poly: inconsistent frequency vector lengths");
    Observable f;
    f.kind = Observable::Kind::TrigPoly;
    f.terms = std::move(terms);
    return f;
}

Observable obs_indicator(SetSpec s) {
    Observable f;
    f.kind = Observable::Kind::Indicator;
    f.set = std::move(s);
    return f;
}

Observable obs_conj(Observable inner) {
    Observable f;
    f.kind = Observable::Kind::Conjugate;
    f.children.push_back(std::move(inner));
    return f;
}

Observable obs_product(std::vector<Observable> fs) {
    if (fs.empty()) throw ShapeError("product observable: need at least one factor");
    Observable f;
    f.kind = Observable::Kind::Product;
    f.children = std::move(fs);
    return f;
}

Observable obs_sum(std::vector<Observable> fs) {
    if (fs.empty()) throw ShapeError("sum observable: need at least one term");
    Observable f;
    f.kind = Observable::Kind::Sum;
    f.children = std::move(fs);
    return f;
}

Observable obs_scale(cplx c, Observable inner) {
    Observable f;
    f.kind = Observable::Kind::Scale;
    f.factor = c;
    f.children.push_back(std::move(inner));
    return f;
}

Observable obs_const(cplx c, i64 coord_count_) {
    if (coord_count_ <= 0) throw ShapeError("const observable: bad coordinate count");
    return obs_trig({{std::vector<i64>(static_cast<std::size_t>(coord_count_), 0), c}});
}

namespace {

// Phase of a character, reduced mod 1 exactly per coordinate before the one
// conversion to double: xi*x on the coordinate's own lattice (2^-64 grid,
// residues mod N, or the 2^-128 nil z grid).
double character_phase(const std::vector<i64>& freq, const SystemSpec& sys, const PhasePoint& p, std::size_t& pos) {
    switch (sys.kind) {
        case SystemKind::Cyclic: {
            i64 xi = freq[pos++];
            i64 m = ((xi % sys.modulus) * (p.residue % sys.modulus)) % sys.modulus;
            if (m < 0) m += sys.modulus;
            return static_cast<double>(m) / static_cast<double>(sys.modulus);
        }
        case SystemKind::Heisenberg: {
            double phase = (freq[pos] * p.t[0]).to_real();
            phase += (freq[pos + 1] * p.t[1]).to_real();
            phase += (freq[pos + 2] * p.heis_z).to_real();
            pos += 3;
            return phase;
        }
        case SystemKind::Product: {
            double phase = 0.0;
            for (std::size_t i = 0; i < p.parts.size(); ++i)
                phase += character_phase(freq, sys.components[i], p.parts[i], pos);
            return phase;
        }
        default: {
            double phase = 0.0;
            for (TorusCoord c : p.t) phase += (freq[pos++] * c).to_real();
            return phase;
        }
    }
}

cplx eval_character(const std::vector<i64>& freq, const SystemSpec& sys, const PhasePoint& p) {
    if (static_cast<i64>(freq.size()) != coord_count(sys))
        throw ShapeError("character: frequency vector length != coordinate count");
    std::size_t pos = 0;
    double phase = character_phase(freq, sys, p, pos);
    return unit_phase(phase - std::floor(phase));
}

}  // namespace

cplx evaluate(const Observable& f, const SystemSpec& sys, const PhasePoint& p) {
    switch (f.kind) {
        case Observable::Kind::Character:
            return eval_character(f.freq, sys, p);
        case Observable::Kind::TrigPoly: {
            cplx acc{0.0, 0.0};
            for (const auto& [freq, c] : f.terms) acc += c * eval_character(freq, sys, p);
            return acc;
        }
        case Observable::Kind::Indicator:
            return set_contains(f.set, sys, p) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
        case Observable::Kind::Conjugate:
            return std::conj(evaluate(f.children[0], sys, p));
        case Observable::Kind::Product: {
            cplx acc{1.0, 0.0};
            for (const auto& g : f.children) acc *= evaluate(g, sys, p);
            return acc;
        }
        case Observable::Kind::Sum: {
            cplx acc{0.0, 0.0};
            for (const auto& g : f.children) acc += evaluate(g, sys, p);
            return acc;
        }
        case Observable::Kind::Scale:
            return f.factor * evaluate(f.children[0], sys, p);
    }
    throw DomainError("evaluate: bad kind");
}

double sup_norm_bound(const Observable& f) {
    switch (f.kind) {
        case Observable::Kind::Character:
            return 1.0;
        case Observable::Kind::TrigPoly: {
            double s = 0.0;
            for (const auto& [freq, c] : f.terms) s += std::abs(c);
            return s;
        }
        case Observable::Kind::Indicator:
            return 1.0;
        case Observable::Kind::Conjugate:
            return sup_norm_bound(f.children[0]);
        case Observable::Kind::Product: {
            double s = 1.0;
            for (const auto& g : f.children) s *= sup_norm_bound(g);
            return s;
        }
        case Observable::Kind::Sum: {
            double s = 0.0;
            for (const auto& g : f.children) s += sup_norm_bound(g);
            return s;
        }
        case Observable::Kind::Scale:
            return std::abs(f.factor) * sup_norm_bound(f.children[0]);
    }
    throw DomainError("sup_norm_bound: bad kind");
}

cplx haar_integral(const Observable& f, const SystemSpec& sys, i64 M, int threads) {
    const i64 total = grid_total(sys, M);
    auto sizes = grid_axis_sizes(sys, M);
    cplx sum = det_sum<cplx>(
        total,
        [&](i64 cell) {
            std::vector<i64> idx(sizes.size());
            i64 rem = cell;
            for (std::size_t a = sizes.size(); a-- > 0;) {
                idx[a] = rem % sizes[a];
                rem /= sizes[a];
            }
            return evaluate(f, sys, point_from_axes(sys, idx, M));
        },
        threads);
    return sum / static_cast<double>(total);
}

}  // namespace ergo
