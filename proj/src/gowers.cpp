#include "ergo/gowers.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/fft.hpp"
#include "ergo/parallel.hpp"

namespace ergo {

ComplexSignal make_signal(std::vector<cplx> values) {
    if (values.empty()) throw ShapeError("signal: needs at least one value");
    ComplexSignal f;
    f.N = static_cast<i64>(values.size());
    f.values = std::move(values);
    double s = 0.0;
    for (const cplx& v : f.values) s = std::max(s, std::abs(v));
    f.sup_bound = s;
    return f;
}

namespace {

void check_level(i64 k, i64 hi, const char* what) {
    if (k < 1 || k > hi) throw DomainError(std::string(what) + ": order k out of range");
}

// Work guard: N^k must stay within 2^32 grid cells.
void check_work(i64 N, i64 k, const char* what) {
    u128 p = 1;
    for (i64 i = 0; i < k; ++i) {
        p *= static_cast<u128>(N);
        if (p > (u128(1) << 32)) throw GuardError(std::string(what) + ": N^k work guard exceeded");
    }
}

// Multiplicative derivative D_h f(x) = f(x+h) conj f(x).
std::vector<cplx> derivative(const std::vector<cplx>& v, i64 h) {
    const i64 N = static_cast<i64>(v.size());
    std::vector<cplx> d(v.size());
    for (i64 x = 0; x < N; ++x)
        d[static_cast<std::size_t>(x)] =
            v[static_cast<std::size_t>((x + h) % N)] * std::conj(v[static_cast<std::size_t>(x)]);
    return d;
}

// ||f||_{U_k}^{2^k} by the derivative recursion, sequential.
double pow_recursive(const std::vector<cplx>& v, i64 k) {
    const i64 N = static_cast<i64>(v.size());
    if (k == 1) {
        cplx s{0.0, 0.0};
        for (const cplx& x : v) s += x;
        return std::norm(s / static_cast<double>(N));
    }
    double acc = 0.0;
    for (i64 h = 0; h < N; ++h) acc += pow_recursive(derivative(v, h), k - 1);
    return acc / static_cast<double>(N);
}

// Same with the top derivative layer distributed across threads.
double pow_recursive_threaded(const std::vector<cplx>& v, i64 k, int threads) {
    const i64 N = static_cast<i64>(v.size());
    if (k == 1) return pow_recursive(v, 1);
    double acc = det_sum<double>(
        N, [&](i64 h) { return pow_recursive(derivative(v, h), k - 1); }, threads);
    return acc / static_cast<double>(N);
}

// ||f||_{U_k}^{2^k} by enumerating all (x, h_1..h_k) configurations directly.
double pow_cube(const std::vector<cplx>& v, i64 k, int threads) {
    const i64 N = static_cast<i64>(v.size());
    u128 total128 = 1;
    for (i64 i = 0; i < k + 1; ++i) total128 *= static_cast<u128>(N);
    if (total128 > (u128(1) << 32)) throw GuardError("cube sum: N^(k+1) work guard exceeded");
    const i64 total = static_cast<i64>(total128);
    const i64 verts = i64(1) << k;
    cplx sum = det_sum<cplx>(
        total,
        [&](i64 cell) {
            i64 x = cell % N;
            i64 rem = cell / N;
            i64 h[5];
            for (i64 j = 0; j < k; ++j) {
                h[j] = rem % N;
                rem /= N;
            }
            i64 off[32];
            off[0] = x;
            for (i64 m = 1; m < verts; ++m) {
                i64 low = m & (-m);
                int bit = __builtin_ctzll(static_cast<unsigned long long>(low));
                off[m] = (off[m ^ low] + h[bit]) % N;
            }
            cplx p{1.0, 0.0};
            for (i64 m = 0; m < verts; ++m) {
                cplx f = v[static_cast<std::size_t>(off[m])];
                p *= (__builtin_popcountll(static_cast<unsigned long long>(m)) & 1) ? std::conj(f) : f;
            }
            return p;
        },
        threads);
    return (sum / static_cast<double>(total)).real();
}

double root_2k(double p, i64 k) {
    return std::pow(std::max(p, 0.0), 1.0 / static_cast<double>(i64(1) << k));
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

GowersValue gowers_norm(const ComplexSignal& f, i64 k, int threads) {
    check_level(k, 5, "box norm");
    check_work(f.N, k, "box norm");
    return GowersValue{k, root_2k(pow_recursive_threaded(f.values, k, threads), k), GowersMethod::Recursive};
}

GowersValue gowers_norm_cube_sum(const ComplexSignal& f, i64 k, int threads) {
    check_level(k, 5, "cube sum");
    return GowersValue{k, root_2k(pow_cube(f.values, k, threads), k), GowersMethod::CubeSum};
}

GowersValue gowers_u2_spectral(const ComplexSignal& f) {
    std::vector<cplx> hat = dft(f.values);
    const double N = static_cast<double>(f.N);
    double s = 0.0;
    for (const cplx& c : hat) {
        double a2 = std::norm(c / N);
        s += a2 * a2;
    }
    return GowersValue{2, std::pow(s, 0.25), GowersMethod::Spectral};
}

cplx gowers_inner(const std::vector<ComplexSignal>& fs, i64 k, int threads) {
    check_level(k, 5, "box inner product");
    if (static_cast<i64>(fs.size()) != (i64(1) << k))
        throw ShapeError("box inner product: needs exactly 2^k signals");
    const i64 N = fs[0].N;
    for (const auto& f : fs)
        if (f.N != N) throw ShapeError("box inner product: signals have mismatched lengths");
    check_work(N, k, "box inner product");

    // Split on the first direction: for fixed h' = (h_2..h_k) the average over
    // (x, h_1) factors into (E_x A)(conj E_x B) with A, B the half-cube products.
    const i64 half = i64(1) << (k - 1);
    i64 tuples = 1;
    for (i64 j = 1; j < k; ++j) tuples *= N;
    cplx sum = det_sum<cplx>(
        tuples,
        [&](i64 cell) {
            i64 h[5];
            i64 rem = cell;
            for (i64 j = 0; j + 1 < k; ++j) {
                h[j] = rem % N;
                rem /= N;
            }
            i64 off[16];
            cplx sa{0.0, 0.0}, sb{0.0, 0.0};
            for (i64 x = 0; x < N; ++x) {
                off[0] = x;
                for (i64 m = 1; m < half; ++m) {
                    i64 low = m & (-m);
                    int bit = __builtin_ctzll(static_cast<unsigned long long>(low));
                    off[m] = (off[m ^ low] + h[bit]) % N;
                }
                cplx a{1.0, 0.0}, b{1.0, 0.0};
                for (i64 m = 0; m < half; ++m) {
                    std::size_t o = static_cast<std::size_t>(off[m]);
                    cplx fa = fs[static_cast<std::size_t>(m << 1)].values[o];
                    cplx fb = fs[static_cast<std::size_t>((m << 1) | 1)].values[o];
                    if (__builtin_popcountll(static_cast<unsigned long long>(m)) & 1) {
                        fa = std::conj(fa);
                        fb = std::conj(fb);
                    }
                    a *= fa;
                    b *= fb;
                }
                sa += a;
                sb += b;
            }
            return (sa / static_cast<double>(N)) * std::conj(sb / static_cast<double>(N));
        },
        threads);
    return sum / static_cast<double>(tuples);
}

std::pair<double, double> csg_check(const std::vector<ComplexSignal>& fs, i64 k, int threads) {
    double lhs = std::abs(gowers_inner(fs, k, threads));
    double rhs = 1.0;
    for (const auto& f : fs) rhs *= gowers_norm(f, k, threads).value;
    return {lhs, rhs};
}

std::pair<double, double> seminorm_recursion_check(const ComplexSignal& f, i64 k, int threads) {
    check_level(k, 3, "recursion check");
    const i64 N = f.N;
    double lhs = pow_cube(f.values, k + 1, threads);
    double rhs = det_sum<double>(
                     N, [&](i64 n) { return pow_recursive(derivative(f.values, n), k); }, threads) /
                 static_cast<double>(N);
    return {lhs, rhs};
}

PhasePoint group_add(const SystemSpec& sys, const PhasePoint& a, const PhasePoint& b) {
    switch (sys.kind) {
        case SystemKind::Cyclic:
            return cyclic_point(sys.modulus, (a.residue + b.residue) % sys.modulus);
        case SystemKind::Rotation: {
            std::vector<TorusCoord> t(a.t.size());
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = a.t[i] + b.t[i];
            return torus_point(t);
        }
        default:
            throw CapabilityError("group_add: only cyclic and torus rotation systems form plain groups here");
    }
}

namespace {

CubeSample assemble_cube(const SystemSpec& sys, i64 k, PhasePoint z, std::vector<PhasePoint> t) {
    CubeSample s;
    s.k = k;
    s.base = std::move(z);
    s.shifts = std::move(t);
    const i64 verts = i64(1) << k;
    s.vertices.reserve(static_cast<std::size_t>(verts));
    for (i64 m = 0; m < verts; ++m) {
        PhasePoint p = s.base;
        for (i64 j = 0; j < k; ++j)
            if ((m >> j) & 1) p = group_add(sys, p, s.shifts[static_cast<std::size_t>(j)]);
        s.vertices.push_back(std::move(p));
    }
    return s;
}

PhasePoint random_group_point(const SystemSpec& sys, std::mt19937_64& rng) {
    switch (sys.kind) {
        case SystemKind::Cyclic: {
            std::uniform_int_distribution<i64> d(0, sys.modulus - 1);
            return cyclic_point(sys.modulus, d(rng));
        }
        case SystemKind::Rotation: {
            std::vector<TorusCoord> t(static_cast<std::size_t>(coord_count(sys)));
            for (auto& c : t) c = TorusCoord{rng()};
            return torus_point(t);
        }
        default:
            throw CapabilityError("cube sample: only cyclic and torus rotation systems are supported");
    }
}

}  // namespace

CubeSample cube_sample(const SystemSpec& sys, i64 k, std::mt19937_64& rng) {
    check_level(k, 4, "cube sample");
    PhasePoint z = random_group_point(sys, rng);
    std::vector<PhasePoint> t;
    for (i64 j = 0; j < k; ++j) t.push_back(random_group_point(sys, rng));
    return assemble_cube(sys, k, std::move(z), std::move(t));
}

CubeSample cube_sample_grid(const SystemSpec& sys, i64 k, i64 grid_index, i64 M) {
    check_level(k, 4, "cube sample");
    if (grid_index < 0) throw DomainError("cube sample: negative grid index");
    const i64 d = coord_count(sys);
    const i64 base = sys.kind == SystemKind::Cyclic ? sys.modulus : M;
    if (sys.kind != SystemKind::Cyclic && sys.kind != SystemKind::Rotation)
        throw CapabilityError("cube sample: only cyclic and torus rotation systems are supported");
    if (base < 1) throw DomainError("cube sample: grid must have at least one point");
    const i64 digits = sys.kind == SystemKind::Cyclic ? (k + 1) : (k + 1) * d;
    u128 total = 1;
    for (i64 i = 0; i < digits; ++i) {
        total *= static_cast<u128>(base);
        if (total > (u128(1) << 32)) throw GuardError("cube sample: grid size guard exceeded");
    }
    if (static_cast<u128>(grid_index) >= total) throw DomainError("cube sample: grid index out of range");

    i64 rem = grid_index;
    auto next_point = [&]() -> PhasePoint {
        if (sys.kind == SystemKind::Cyclic) {
            i64 r = rem % base;
            rem /= base;
            return cyclic_point(sys.modulus, r);
        }
        std::vector<TorusCoord> t(static_cast<std::size_t>(d));
        for (auto& c : t) {
            c = coord_from_fraction(rem % base, base);
            rem /= base;
        }
        return torus_point(t);
    };
    PhasePoint z = next_point();
    std::vector<PhasePoint> t;
    for (i64 j = 0; j < k; ++j) t.push_back(next_point());
    return assemble_cube(sys, k, std::move(z), std::move(t));
}

GowersValue rotation_seminorm_quadrature(const Observable& f, const SystemSpec& sys, i64 k, i64 M,
                                         int threads) {
    if (sys.kind != SystemKind::Rotation || coord_count(sys) != 1)
        throw CapabilityError("quadrature seminorm: needs a one-dimensional rotation");
    check_level(k, 3, "quadrature seminorm");
    if (M < 1) throw DomainError("quadrature seminorm: grid must have at least one point");
    check_work(M, k, "quadrature seminorm");
    std::vector<cplx> g(static_cast<std::size_t>(M));
    for (i64 i = 0; i < M; ++i)
        g[static_cast<std::size_t>(i)] = evaluate(f, sys, torus_point({coord_from_fraction(i, M)}));
    return GowersValue{k, root_2k(pow_recursive_threaded(g, k, threads), k), GowersMethod::Quadrature};
}

GvnReport gvn_ratio(const std::vector<ComplexSignal>& fs, i64 k, int threads) {
    check_level(k, 5, "progression correlation");
    if (static_cast<i64>(fs.size()) != k + 1)
        throw ShapeError("progression correlation: needs exactly k+1 signals");
    const i64 N = fs[0].N;
    for (const auto& f : fs) {
        if (f.N != N) throw ShapeError("progression correlation: signals have mismatched lengths");
        if (f.sup_bound > 1.0 + 1e-12)
            throw DomainError("progression correlation: signals must be bounded by 1");
    }
    if (!is_prime(N)) throw DomainError("progression correlation: N must be prime");
    if (N <= k) throw DomainError("progression correlation: N must exceed k");
    check_work(N, k, "progression correlation");

    cplx sum = det_sum<cplx>(
        N * N,
        [&](i64 cell) {
            i64 x = cell % N;
            i64 y = cell / N;
            cplx p{1.0, 0.0};
            for (i64 j = 0; j <= k; ++j)
                p *= fs[static_cast<std::size_t>(j)].values[static_cast<std::size_t>((x + j * y) % N)];
            return p;
        },
        threads);
    GvnReport r;
    r.correlation = std::abs(sum / static_cast<double>(N * N));
    r.bound = gowers_norm(fs[0], k, threads).value;
    for (std::size_t j = 1; j < fs.size(); ++j)
        r.bound = std::min(r.bound, gowers_norm(fs[j], k, threads).value);
    r.ratio = r.bound > 0.0 ? r.correlation / r.bound : 0.0;
    return r;
}

std::vector<GowersValue> monotonicity_check(const ComplexSignal& f, i64 k_max, int threads) {
    check_level(k_max, 4, "monotonicity check");
    std::vector<GowersValue> out;
    for (i64 k = 1; k <= k_max; ++k) out.push_back(gowers_norm(f, k, threads));
    return out;
}

}  // namespace ergo
