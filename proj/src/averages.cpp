#include "ergo/averages.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/parallel.hpp"

namespace ergo {

IteratePattern linear_pattern(i64 k) {
    if (k < 1) throw ShapeError("pattern: k must be at least 1");
    IteratePattern p;
    for (i64 j = 1; j <= k; ++j) p.polys.push_back({0, j});
    p.zero_at_origin = true;
    return p;
}

IteratePattern make_pattern(std::vector<std::vector<i64>> polys) {
    if (polys.empty()) throw ShapeError("pattern: needs at least one polynomial");
    IteratePattern p;
    p.polys = std::move(polys);
    p.zero_at_origin = true;
    for (auto& c : p.polys) {
        if (c.empty()) c.push_back(0);
        if (c[0] != 0) p.zero_at_origin = false;
    }
    return p;
}

i64 pattern_power(const IteratePattern& pat, std::size_t j, i64 n) {
    if (j >= pat.polys.size()) throw ShapeError("pattern: polynomial index out of range");
    const auto& c = pat.polys[j];
    i128 acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
        acc = acc * n + c[i];
        if (acc > (i128(1) << 62) || acc < -(i128(1) << 62))
            throw GuardError("pattern: exponent exceeds the iterate range");
    }
    return checked_i64(acc, "pattern exponent");
}

namespace {

// Cesaro sums over [0,N) split at the quarter horizons ceil(iN/4); each chunk
// is a deterministic tree sum, so the report is thread-count independent.
template <typename Term>
AverageReport build_report(i64 N, Term&& term, int threads) {
    if (N < 1) throw DomainError("average: horizon must be positive");
    AverageReport r;
    r.N = N;
    std::array<i64, 4> h{};
    for (i64 i = 0; i < 4; ++i) h[static_cast<std::size_t>(i)] = ((i + 1) * N + 3) / 4;
    h[3] = N;
    cplx cum{0.0, 0.0};
    i64 start = 0;
    for (int i = 0; i < 4; ++i) {
        i64 len = h[static_cast<std::size_t>(i)] - start;
        if (len > 0)
            cum += det_sum<cplx>(len, [&](i64 t) { return term(start + t); }, threads);
        start = h[static_cast<std::size_t>(i)];
        r.checkpoints[static_cast<std::size_t>(i)] = cum / static_cast<double>(h[static_cast<std::size_t>(i)]);
    }
    r.value = r.checkpoints[3];
    double osc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            osc = std::max(osc, std::abs(r.checkpoints[static_cast<std::size_t>(a)] -
                                         r.checkpoints[static_cast<std::size_t>(b)]));
    r.oscillation = osc;
    return r;
}

void check_work32(u128 total, const char* what) {
    if (total > (u128(1) << 32)) throw GuardError(std::string(what) + ": work guard exceeded");
}

std::vector<i64> decode_axes(const std::vector<i64>& sizes, i64 cell) {
    std::vector<i64> idx(sizes.size());
    i64 rem = cell;
    for (std::size_t a = sizes.size(); a-- > 0;) {
        idx[a] = rem % sizes[a];
        rem /= sizes[a];
    }
    return idx;
}

// Four unnormalized prefix sums (quarter horizons), mergeable across grid cells.
struct Quad {
    std::array<cplx, 4> v{};
    Quad operator+(const Quad& o) const {
        Quad r;
        for (int i = 0; i < 4; ++i) r.v[static_cast<std::size_t>(i)] =
            v[static_cast<std::size_t>(i)] + o.v[static_cast<std::size_t>(i)];
        return r;
    }
};

std::array<i64, 4> quarter_marks(i64 N) {
    std::array<i64, 4> h{};
    for (i64 i = 0; i < 4; ++i) h[static_cast<std::size_t>(i)] = ((i + 1) * N + 3) / 4;
    h[3] = N;
    return h;
}

AverageReport report_from_quad(i64 N, const Quad& q, double denom_per_mark) {
    AverageReport r;
    r.N = N;
    auto h = quarter_marks(N);
    for (int i = 0; i < 4; ++i)
        r.checkpoints[static_cast<std::size_t>(i)] =
            q.v[static_cast<std::size_t>(i)] /
            (denom_per_mark * static_cast<double>(h[static_cast<std::size_t>(i)]));
    r.value = r.checkpoints[3];
    double osc = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            osc = std::max(osc, std::abs(r.checkpoints[static_cast<std::size_t>(a)] -
                                         r.checkpoints[static_cast<std::size_t>(b)]));
    r.oscillation = osc;
    return r;
}

}  // namespace

AverageReport multi_average_pointwise(const SystemSpec& sys, const std::vector<Observable>& fs,
                                      const IteratePattern& pattern, const PhasePoint& x, i64 N,
                                      int threads) {
    if (fs.size() != pattern.polys.size())
        throw ShapeError("multiple average: one observable per pattern polynomial");
    validate_point(sys, x);
    return build_report(
        N,
        [&](i64 n) {
            cplx p{1.0, 0.0};
            for (std::size_t j = 0; j < fs.size(); ++j)
                p *= evaluate(fs[j], sys, iterate(sys, x, pattern_power(pattern, j, n)));
            return p;
        },
        threads);
}

double multi_average_L2(const SystemSpec& sys, const std::vector<Observable>& fs,
                        const IteratePattern& pattern, i64 N, i64 M, int threads) {
    if (fs.size() != pattern.polys.size())
        throw ShapeError("multiple average: one observable per pattern polynomial");
    if (N < 1) throw DomainError("average: horizon must be positive");
    const i64 G = grid_total(sys, M);
    check_work32(u128(G) * u128(N), "L2 average");
    auto sizes = grid_axis_sizes(sys, M);
    double s = det_sum<double>(
        G,
        [&](i64 cell) {
            PhasePoint x = point_from_axes(sys, decode_axes(sizes, cell), M);
            cplx sum{0.0, 0.0};
            for (i64 n = 0; n < N; ++n) {
                cplx p{1.0, 0.0};
                for (std::size_t j = 0; j < fs.size(); ++j)
                    p *= evaluate(fs[j], sys, iterate(sys, x, pattern_power(pattern, j, n)));
                sum += p;
            }
            return std::norm(sum / static_cast<double>(N));
        },
        threads);
    return std::sqrt(s / static_cast<double>(G));
}

std::vector<double> intersection_sequence(const SystemSpec& sys, const SetSpec& A, i64 k, i64 n_max,
                                          i64 grid_M, int threads) {
    if (k < 1) throw DomainError("intersection sequence: k must be at least 1");
    if (n_max < 0) throw DomainError("intersection sequence: n_max must be nonnegative");
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);

    if (A.kind == SetSpec::Kind::FullSpace) {
        std::fill(out.begin(), out.end(), 1.0);
        return out;
    }

    const bool rotation_exact =
        sys.kind == SystemKind::Rotation && (A.kind == SetSpec::Kind::TorusIntervals ||
                                             A.kind == SetSpec::Kind::CylinderProduct);
    if (rotation_exact) {
        const i64 d = coord_count(sys);
        std::vector<IntervalUnion> base(static_cast<std::size_t>(d), iu_full());
        if (A.kind == SetSpec::Kind::TorusIntervals) {
            if (A.coord >= d) throw ShapeError("intersection sequence: coordinate out of range");
            base[static_cast<std::size_t>(A.coord)] = A.intervals;
        } else {
            if (static_cast<i64>(A.cylinder.size()) != d)
                throw ShapeError("intersection sequence: cylinder arity mismatch");
            base = A.cylinder;
        }
        for (i64 n = 0; n <= n_max; ++n) {
            double m = 1.0;
            for (i64 c = 0; c < d; ++c) {
                IntervalUnion inter = base[static_cast<std::size_t>(c)];
                for (i64 j = 1; j <= k && !inter.empty(); ++j) {
                    i64 e = checked_i64(i128(j) * n, "intersection shift");
                    TorusCoord t = (-e) * sys.alpha[static_cast<std::size_t>(c)];
                    inter = iu_intersect(inter, iu_shift(base[static_cast<std::size_t>(c)], t));
                }
                m *= inter.measure();
            }
            out[static_cast<std::size_t>(n)] = m;
        }
        return out;
    }

    if (sys.kind == SystemKind::Cyclic && A.kind == SetSpec::Kind::BitVectorSet) {
        if (A.modulus != sys.modulus) throw ShapeError("intersection sequence: modulus mismatch");
        const i64 Ns = sys.modulus;
        for (i64 n = 0; n <= n_max; ++n) {
            std::vector<bool> inter = A.bits;
            for (i64 j = 1; j <= k; ++j) {
                i64 e = checked_i64(i128(j) * n % Ns * sys.shift % Ns, "intersection shift");
                SetSpec rolled = rotate_bits(A, -e);
                for (i64 r = 0; r < Ns; ++r)
                    inter[static_cast<std::size_t>(r)] =
                        inter[static_cast<std::size_t>(r)] && rolled.bits[static_cast<std::size_t>(r)];
            }
            i64 pop = 0;
            for (bool b : inter) pop += b ? 1 : 0;
            out[static_cast<std::size_t>(n)] = static_cast<double>(pop) / static_cast<double>(Ns);
        }
        return out;
    }

    // General systems: grid quadrature of the orbit-membership product.
    const i64 G = grid_total(sys, grid_M);
    auto sizes = grid_axis_sizes(sys, grid_M);
    for (i64 n = 0; n <= n_max; ++n) {
        double v = det_sum<double>(
                       G,
                       [&](i64 cell) {
                           PhasePoint x = point_from_axes(sys, decode_axes(sizes, cell), grid_M);
                           for (i64 j = 0; j <= k; ++j) {
                               i64 e = checked_i64(i128(j) * n, "intersection exponent");
                               if (!set_contains(A, sys, iterate(sys, x, e))) return 0.0;
                           }
                           return 1.0;
                       },
                       threads) /
                   static_cast<double>(G);
        out[static_cast<std::size_t>(n)] = v;
    }
    return out;
}

namespace {

i64 cube_order_from_count(std::size_t count) {
    for (i64 k = 1; k <= 5; ++k)
        if ((std::size_t(1) << k) - 1 == count) return k;
    throw ShapeError("cube average: needs 2^k - 1 observables");
}

}  // namespace

AverageReport cube_average(const SystemSpec& sys, const std::vector<Observable>& fs, i64 N,
                           const PhasePoint& x, int threads) {
    const i64 k = cube_order_from_count(fs.size());
    if (N < 1) throw DomainError("cube average: horizon must be positive");
    validate_point(sys, x);
    u128 total128 = 1;
    for (i64 j = 0; j < k; ++j) total128 *= static_cast<u128>(N);
    check_work32(total128, "cube average");
    const i64 total = static_cast<i64>(total128);
    const i64 verts = i64(1) << k;
    AverageReport r = build_report(
        total,
        [&](i64 cell) {
            i64 n[5];
            i64 rem = cell;
            for (i64 j = 0; j < k; ++j) {
                n[j] = rem % N;
                rem /= N;
            }
            i64 e[32];
            e[0] = 0;
            cplx p{1.0, 0.0};
            for (i64 m = 1; m < verts; ++m) {
                i64 low = m & (-m);
                e[m] = e[m ^ low] + n[__builtin_ctzll(static_cast<unsigned long long>(low))];
                p *= evaluate(fs[static_cast<std::size_t>(m - 1)], sys, iterate(sys, x, e[m]));
            }
            return p;
        },
        threads);
    r.N = N;
    return r;
}

AverageReport cube_average_integrated(const SystemSpec& sys, const std::vector<Observable>& fs, i64 N,
                                      i64 M, int threads) {
    const i64 k = cube_order_from_count(fs.size());
    if (N < 1) throw DomainError("cube average: horizon must be positive");
    const i64 G = grid_total(sys, M);
    u128 total128 = static_cast<u128>(G);
    for (i64 j = 0; j < k; ++j) total128 *= static_cast<u128>(N);
    check_work32(total128, "integrated cube average");
    auto sizes = grid_axis_sizes(sys, M);
    i64 per_cell = 1;
    for (i64 j = 0; j < k; ++j) per_cell *= N;
    auto marks = quarter_marks(per_cell);
    const i64 verts = i64(1) << k;
    Quad q = det_sum<Quad>(
        G,
        [&](i64 g) {
            PhasePoint x = point_from_axes(sys, decode_axes(sizes, g), M);
            Quad local;
            cplx cum{0.0, 0.0};
            i64 start = 0;
            for (int part = 0; part < 4; ++part) {
                for (i64 cell = start; cell < marks[static_cast<std::size_t>(part)]; ++cell) {
                    i64 n[5];
                    i64 rem = cell;
                    for (i64 j = 0; j < k; ++j) {
                        n[j] = rem % N;
                        rem /= N;
                    }
                    i64 e[32];
                    e[0] = 0;
                    cplx p{1.0, 0.0};
                    for (i64 m = 1; m < verts; ++m) {
                        i64 low = m & (-m);
                        e[m] = e[m ^ low] + n[__builtin_ctzll(static_cast<unsigned long long>(low))];
                        p *= evaluate(fs[static_cast<std::size_t>(m - 1)], sys, iterate(sys, x, e[m]));
                    }
                    cum += p;
                }
                start = marks[static_cast<std::size_t>(part)];
                local.v[static_cast<std::size_t>(part)] = cum;
            }
            return local;
        },
        threads);
    AverageReport r = report_from_quad(per_cell, q, static_cast<double>(G));
    r.N = N;
    return r;
}

AverageReport cube_average_sets(const SystemSpec& sys, const SetSpec& A, i64 k, i64 N, int threads) {
    if (k < 1 || k > 3) throw DomainError("cube set average: order k out of range");
    if (N < 1) throw DomainError("cube set average: horizon must be positive");
    if (A.kind == SetSpec::Kind::FullSpace) {
        AverageReport r;
        r.N = N;
        r.checkpoints.fill(cplx{1.0, 0.0});
        r.value = cplx{1.0, 0.0};
        r.oscillation = 0.0;
        return r;
    }
    u128 total128 = 1;
    for (i64 j = 0; j < k; ++j) total128 *= static_cast<u128>(N);
    check_work32(total128, "cube set average");
    const i64 total = static_cast<i64>(total128);
    const i64 verts = i64(1) << k;
    const i64 max_e = k * (N - 1);

    if (sys.kind == SystemKind::Rotation && (A.kind == SetSpec::Kind::TorusIntervals ||
                                             A.kind == SetSpec::Kind::CylinderProduct)) {
        const i64 d = coord_count(sys);
        std::vector<IntervalUnion> base(static_cast<std::size_t>(d), iu_full());
        if (A.kind == SetSpec::Kind::TorusIntervals) {
            if (A.coord >= d) throw ShapeError("cube set average: coordinate out of range");
            base[static_cast<std::size_t>(A.coord)] = A.intervals;
        } else {
            if (static_cast<i64>(A.cylinder.size()) != d)
                throw ShapeError("cube set average: cylinder arity mismatch");
            base = A.cylinder;
        }
        // shifted[c][e] = factor c pulled back through e steps (exact arcs)
        std::vector<std::vector<IntervalUnion>> shifted(static_cast<std::size_t>(d));
        for (i64 c = 0; c < d; ++c) {
            auto& row = shifted[static_cast<std::size_t>(c)];
            row.reserve(static_cast<std::size_t>(max_e) + 1);
            for (i64 e = 0; e <= max_e; ++e)
                row.push_back(iu_shift(base[static_cast<std::size_t>(c)],
                                       (-e) * sys.alpha[static_cast<std::size_t>(c)]));
        }
        AverageReport r = build_report(
            total,
            [&](i64 cell) {
                i64 n[3];
                i64 rem = cell;
                for (i64 j = 0; j < k; ++j) {
                    n[j] = rem % N;
                    rem /= N;
                }
                i64 e[8];
                e[0] = 0;
                for (i64 m = 1; m < verts; ++m) {
                    i64 low = m & (-m);
                    e[m] = e[m ^ low] + n[__builtin_ctzll(static_cast<unsigned long long>(low))];
                }
                double meas = 1.0;
                for (i64 c = 0; c < d && meas > 0.0; ++c) {
                    const auto& row = shifted[static_cast<std::size_t>(c)];
                    IntervalUnion inter = row[static_cast<std::size_t>(e[1])];
                    for (i64 m = 2; m < verts && !inter.empty(); ++m)
                        inter = iu_intersect(inter, row[static_cast<std::size_t>(e[m])]);
                    meas *= inter.measure();
                }
                return cplx{meas, 0.0};
            },
            threads);
        r.N = N;
        return r;
    }

    if (sys.kind == SystemKind::Cyclic && A.kind == SetSpec::Kind::BitVectorSet) {
        if (A.modulus != sys.modulus) throw ShapeError("cube set average: modulus mismatch");
        const i64 Ns = sys.modulus;
        std::vector<std::vector<bool>> rolled;
        rolled.reserve(static_cast<std::size_t>(max_e) + 1);
        for (i64 e = 0; e <= max_e; ++e)
            rolled.push_back(rotate_bits(A, -checked_i64(i128(e) * sys.shift, "cube shift")).bits);
        AverageReport r = build_report(
            total,
            [&](i64 cell) {
                i64 n[3];
                i64 rem = cell;
                for (i64 j = 0; j < k; ++j) {
                    n[j] = rem % N;
                    rem /= N;
                }
                i64 e[8];
                e[0] = 0;
                for (i64 m = 1; m < verts; ++m) {
                    i64 low = m & (-m);
                    e[m] = e[m ^ low] + n[__builtin_ctzll(static_cast<unsigned long long>(low))];
                }
                i64 pop = 0;
                for (i64 rbit = 0; rbit < Ns; ++rbit) {
                    bool in = true;
                    for (i64 m = 1; m < verts && in; ++m)
                        in = rolled[static_cast<std::size_t>(e[m])][static_cast<std::size_t>(rbit)];
                    pop += in ? 1 : 0;
                }
                return cplx{static_cast<double>(pop) / static_cast<double>(Ns), 0.0};
            },
            threads);
        r.N = N;
        return r;
    }

    throw CapabilityError("cube set average: exact paths cover torus rotations with interval sets "
                          "and cyclic bit sets");
}

cplx kronecker_double_limit(const Observable& f1, const Observable& f2, const SystemSpec& sys,
                            const PhasePoint& x, i64 M, int threads) {
    if (sys.kind != SystemKind::Rotation)
        throw CapabilityError("double-average limit: rotation systems only");
    validate_point(sys, x);
    const i64 G = grid_total(sys, M);
    auto sizes = grid_axis_sizes(sys, M);
    cplx sum = det_sum<cplx>(
        G,
        [&](i64 cell) {
            PhasePoint t = point_from_axes(sys, decode_axes(sizes, cell), M);
            std::vector<TorusCoord> xt(x.t.size()), x2t(x.t.size());
            for (std::size_t c = 0; c < x.t.size(); ++c) {
                xt[c] = x.t[c] + t.t[c];
                x2t[c] = x.t[c] + 2 * t.t[c];
            }
            return evaluate(f1, sys, torus_point(std::move(xt))) *
                   evaluate(f2, sys, torus_point(std::move(x2t)));
        },
        threads);
    return sum / static_cast<double>(G);
}

double roth_triple_integral(const Observable& f, const SystemSpec& sys, i64 M, int threads) {
    if (sys.kind != SystemKind::Rotation || coord_count(sys) != 1)
        throw CapabilityError("triple progression integral: one-dimensional rotation only");
    if (M < 1) throw DomainError("triple progression integral: grid must have at least one point");
    check_work32(u128(M) * u128(M), "triple progression integral");
    // s and s+2t live on half-grid midpoints, s+t on the whole-grid points.
    std::vector<double> mid(static_cast<std::size_t>(M)), whole(static_cast<std::size_t>(M));
    for (i64 i = 0; i < M; ++i) {
        cplx a = evaluate(f, sys, torus_point({coord_from_fraction(2 * i + 1, 2 * M)}));
        cplx b = evaluate(f, sys, torus_point({coord_from_fraction(i, M)}));
        if (std::fabs(a.imag()) > 1e-9 || std::fabs(b.imag()) > 1e-9)
            throw DomainError("triple progression integral: needs a real observable");
        if (a.real() < -1e-9 || b.real() < -1e-9)
            throw DomainError("triple progression integral: needs a nonnegative observable");
        mid[static_cast<std::size_t>(i)] = a.real();
        whole[static_cast<std::size_t>(i)] = b.real();
    }
    double sum = det_sum<double>(
        M * M,
        [&](i64 cell) {
            i64 i = cell % M;
            i64 j = cell / M;
            return mid[static_cast<std::size_t>(i)] * whole[static_cast<std::size_t>((i + j + 1) % M)] *
                   mid[static_cast<std::size_t>((i + 2 * j + 1) % M)];
        },
        threads);
    return sum / static_cast<double>(M * M);
}

std::pair<double, double> vdc_check(const std::vector<cplx>& u, i64 H) {
    const i64 N = static_cast<i64>(u.size());
    if (N < 1) throw ShapeError("correlation check: empty sequence");
    if (H < 1 || H > N) throw DomainError("correlation check: window must satisfy 1 <= H <= N");
    for (const cplx& c : u)
        if (std::abs(c) > 1.0 + 1e-12) throw DomainError("correlation check: sequence must be bounded by 1");
    cplx mean{0.0, 0.0};
    for (const cplx& c : u) mean += c;
    mean /= static_cast<double>(N);
    double rhs = 0.0;
    for (i64 h = 0; h < H; ++h) {
        cplx corr{0.0, 0.0};
        for (i64 n = 0; n + h < N; ++n)
            corr += u[static_cast<std::size_t>(n + h)] * std::conj(u[static_cast<std::size_t>(n)]);
        rhs += std::abs(corr / static_cast<double>(N - h));
    }
    return {std::norm(mean), rhs / static_cast<double>(H)};
}

std::pair<double, double> vdc_check_vectors(const std::vector<std::vector<cplx>>& u, i64 H) {
    const i64 N = static_cast<i64>(u.size());
    if (N < 1) throw ShapeError("correlation check: empty sequence");
    if (H < 1 || H > N) throw DomainError("correlation check: window must satisfy 1 <= H <= N");
    const std::size_t dim = u[0].size();
    for (const auto& v : u) {
        if (v.size() != dim) throw ShapeError("correlation check: vectors have mismatched dimensions");
        double norm2 = 0.0;
        for (const cplx& c : v) norm2 += std::norm(c);
        if (norm2 > 1.0 + 1e-9) throw DomainError("correlation check: sequence must be bounded by 1");
    }
    std::vector<cplx> mean(dim, cplx{0.0, 0.0});
    for (const auto& v : u)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i];
    double lhs = 0.0;
    for (std::size_t i = 0; i < dim; ++i) lhs += std::norm(mean[i] / static_cast<double>(N));
    double rhs = 0.0;
    for (i64 h = 0; h < H; ++h) {
        cplx corr{0.0, 0.0};
        for (i64 n = 0; n + h < N; ++n)
            for (std::size_t i = 0; i < dim; ++i)
                corr += u[static_cast<std::size_t>(n + h)][i] * std::conj(u[static_cast<std::size_t>(n)][i]);
        rhs += std::abs(corr / static_cast<double>(N - h));
    }
    return {lhs, rhs / static_cast<double>(H)};
}

AverageReport commuting_average(const SystemSpec& family, const std::vector<Observable>& fs, i64 N,
                                i64 M, int threads) {
    if (family.kind != SystemKind::Commuting)
        throw CapabilityError("commuting average: needs a commuting rotation family");
    if (fs.size() != family.components.size())
        throw ShapeError("commuting average: one observable per family member");
    if (N < 1) throw DomainError("commuting average: horizon must be positive");
    const i64 G = grid_total(family, M);
    check_work32(u128(G) * u128(N), "commuting average");
    auto sizes = grid_axis_sizes(family, M);
    auto marks = quarter_marks(N);
    Quad q = det_sum<Quad>(
        G,
        [&](i64 g) {
            PhasePoint x = point_from_axes(family, decode_axes(sizes, g), M);
            Quad local;
            cplx cum{0.0, 0.0};
            i64 start = 0;
            for (int part = 0; part < 4; ++part) {
                for (i64 n = start; n < marks[static_cast<std::size_t>(part)]; ++n) {
                    cplx p{1.0, 0.0};
                    for (std::size_t j = 0; j < fs.size(); ++j)
                        p *= evaluate(fs[j], family.components[j], iterate(family.components[j], x, n));
                    cum += p;
                }
                start = marks[static_cast<std::size_t>(part)];
                local.v[static_cast<std::size_t>(part)] = cum;
            }
            return local;
        },
        threads);
    return report_from_quad(N, q, static_cast<double>(G));
}

}  // namespace ergo
