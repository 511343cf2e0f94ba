#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ergo/fft.hpp"
#include "ergo/gowers.hpp"

using namespace ergo;

namespace {

std::vector<cplx> naive_dft(const std::vector<cplx>& a) {
    const i64 N = static_cast<i64>(a.size());
    std::vector<cplx> out(a.size(), cplx{0.0, 0.0});
    for (i64 xi = 0; xi < N; ++xi)
        for (i64 x = 0; x < N; ++x)
            out[size_t(xi)] += a[size_t(x)] * unit_phase(-double((x * xi) % N) / double(N));
    return out;
}

ComplexSignal random_signal(std::mt19937_64& rng, i64 N) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<cplx> v(static_cast<std::size_t>(N));
    for (auto& c : v) c = cplx(d(rng), d(rng));
    return make_signal(std::move(v));
}

ComplexSignal random_phases(std::mt19937_64& rng, i64 N) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<cplx> v(static_cast<std::size_t>(N));
    for (auto& c : v) c = unit_phase(d(rng));
    return make_signal(std::move(v));
}

ComplexSignal character_signal(i64 N, i64 xi) {
    std::vector<cplx> v(static_cast<std::size_t>(N));
    for (i64 x = 0; x < N; ++x) v[size_t(x)] = unit_phase(double((x * xi) % N) / double(N));
    return make_signal(std::move(v));
}

// Fully explicit box inner product: average over x and all k difference
// directions of the conjugation-alternating vertex product.
cplx brute_inner(const std::vector<ComplexSignal>& fs, i64 k) {
    const i64 N = fs[0].N;
    i64 total = N;
    for (i64 j = 0; j < k; ++j) total *= N;
    cplx sum{0.0, 0.0};
    for (i64 cell = 0; cell < total; ++cell) {
        i64 rem = cell;
        i64 x = rem % N;
        rem /= N;
        std::vector<i64> h(static_cast<std::size_t>(k));
        for (i64 j = 0; j < k; ++j) {
            h[size_t(j)] = rem % N;
            rem /= N;
        }
        cplx p{1.0, 0.0};
        for (i64 m = 0; m < (i64(1) << k); ++m) {
            i64 off = x;
            int bits = 0;
            for (i64 j = 0; j < k; ++j)
                if ((m >> j) & 1) {
                    off += h[size_t(j)];
                    ++bits;
                }
            cplx f = fs[size_t(m)].values[size_t(off % N)];
            p *= (bits & 1) ? std::conj(f) : f;
        }
        sum += p;
    }
    return sum / double(total);
}

}  // namespace

TEST_CASE("discrete fourier transform: matches naive sum, inverts") {
    std::mt19937_64 rng(91);
    for (i64 N : {1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 17, 31, 32, 100, 128}) {
        ComplexSignal f = random_signal(rng, N);
        auto fast = dft(f.values);
        auto slow = naive_dft(f.values);
        for (i64 x = 0; x < N; ++x) CHECK(std::abs(fast[size_t(x)] - slow[size_t(x)]) <= 1e-9 * double(N));
        auto back = inverse_dft(fast);
        for (i64 x = 0; x < N; ++x) CHECK(std::abs(back[size_t(x)] - f.values[size_t(x)]) <= 1e-10);
    }
    CHECK_THROWS_AS(fft_pow2(*std::make_unique<std::vector<cplx>>(3), false), ShapeError);
}

TEST_CASE("box norms: constants, characters, delta closed forms") {
    ComplexSignal one = make_signal(std::vector<cplx>(12, cplx{1.0, 0.0}));
    for (i64 k = 1; k <= 5; ++k) CHECK(gowers_norm(one, k).value == doctest::Approx(1.0).epsilon(1e-12));

    // nonzero-frequency character: order-1 value |E chi| vanishes; from order 2
    // on, the alternating vertex sum cancels every difference direction, so the
    // value is exactly 1
    ComplexSignal chi = character_signal(7, 3);
    CHECK(gowers_norm(chi, 1).value <= 1e-12);
    CHECK(gowers_norm_cube_sum(chi, 1).value <= 1e-12);
    for (i64 k = 2; k <= 3; ++k) {
        CHECK(gowers_norm(chi, k).value == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(gowers_norm_cube_sum(chi, k).value == doctest::Approx(1.0).epsilon(1e-10));
    }

    std::vector<cplx> dv(8, cplx{0.0, 0.0});
    dv[0] = cplx{1.0, 0.0};
    ComplexSignal delta = make_signal(std::move(dv));
    for (i64 k = 1; k <= 3; ++k) {
        double expected = std::pow(8.0, -double(k + 1) / double(i64(1) << k));
        CHECK(gowers_norm(delta, k).value == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(gowers_u2_spectral(delta).value == doctest::Approx(std::pow(8.0, -0.75)).epsilon(1e-12));

    ComplexSignal big = make_signal(std::vector<cplx>(128, cplx{1.0, 0.0}));
    CHECK_THROWS_AS(gowers_norm(big, 5), GuardError);
    CHECK_THROWS_AS(gowers_norm(one, 0), DomainError);
    CHECK_THROWS_AS(gowers_norm(one, 6), DomainError);
    CHECK_THROWS_AS(gowers_norm_cube_sum(big, 4), GuardError);
}

TEST_CASE("box norms: recursive, spectral, cube-sum paths agree") {
    std::mt19937_64 rng(4242);
    for (int t = 0; t < 100; ++t) {
        i64 N = 2 + i64(rng() % 127);
        ComplexSignal f = random_signal(rng, N);
        double rec = gowers_norm(f, 2).value;
        double spec = gowers_u2_spectral(f).value;
        CHECK(std::fabs(rec - spec) <= 1e-10);
    }
    for (int t = 0; t < 30; ++t) {
        i64 N = 2 + i64(rng() % 31);
        i64 k = 1 + i64(t % 3);
        ComplexSignal f = random_signal(rng, N);
        CHECK(std::fabs(gowers_norm(f, k).value - gowers_norm_cube_sum(f, k).value) <= 1e-10);
    }
    // threaded evaluation is bit-identical to single-threaded
    ComplexSignal f = random_signal(rng, 64);
    CHECK(gowers_norm(f, 3, 1).value == gowers_norm(f, 3, 4).value);
}

TEST_CASE("box norms: norm axioms on Z/N") {
    std::mt19937_64 rng(777);
    for (int t = 0; t < 20; ++t) {
        i64 N = 8 + i64(rng() % 57);
        ComplexSignal f = random_signal(rng, N);
        ComplexSignal g = random_signal(rng, N);
        std::vector<cplx> sum(static_cast<std::size_t>(N));
        for (i64 x = 0; x < N; ++x) sum[size_t(x)] = f.values[size_t(x)] + g.values[size_t(x)];
        ComplexSignal fg = make_signal(std::move(sum));
        for (i64 k = 1; k <= 3; ++k)
            CHECK(gowers_norm(fg, k).value <= gowers_norm(f, k).value + gowers_norm(g, k).value + 1e-10);

        std::vector<cplx> rolled(static_cast<std::size_t>(N));
        for (i64 x = 0; x < N; ++x) rolled[size_t(x)] = f.values[size_t((x + 1) % N)];
        ComplexSignal sh = make_signal(std::move(rolled));
        for (i64 k = 1; k <= 3; ++k)
            CHECK(std::fabs(gowers_norm(sh, k).value - gowers_norm(f, k).value) <= 1e-12);
    }
    // order-2 value dominates every Fourier coefficient: nondegeneracy on Z/N
    ComplexSignal f = random_signal(rng, 27);
    auto hat = dft(f.values);
    double top = 0.0;
    for (auto& c : hat) top = std::max(top, std::abs(c) / 27.0);
    CHECK(gowers_norm(f, 2).value >= top - 1e-12);
    CHECK(std::fabs(gowers_norm(f, 2).value - gowers_u2_spectral(f).value) <= 1e-10);
}

TEST_CASE("box inner product: equality case, zero absorption, brute oracle") {
    std::mt19937_64 rng(31337);
    ComplexSignal f = random_signal(rng, 16);
    std::vector<ComplexSignal> same(4, f);
    cplx inner = gowers_inner(same, 2);
    double u4 = std::pow(gowers_norm(f, 2).value, 4.0);
    CHECK(std::fabs(inner.real() - u4) <= 1e-12);
    CHECK(std::fabs(inner.imag()) <= 1e-12);

    std::vector<ComplexSignal> with_zero = same;
    with_zero[2] = make_signal(std::vector<cplx>(16, cplx{0.0, 0.0}));
    CHECK(std::abs(gowers_inner(with_zero, 2)) <= 1e-15);

    for (int t = 0; t < 10; ++t) {
        std::vector<ComplexSignal> fs;
        for (int i = 0; i < 8; ++i) fs.push_back(random_signal(rng, 8));
        cplx fast = gowers_inner(fs, 3);
        cplx brute = brute_inner(fs, 3);
        CHECK(std::abs(fast - brute) <= 1e-12);
        auto [lhs, rhs] = csg_check(fs, 3);
        CHECK(lhs <= rhs + 1e-12);
    }
    for (int t = 0; t < 30; ++t) {
        std::vector<ComplexSignal> fs;
        for (int i = 0; i < 4; ++i) fs.push_back(random_signal(rng, 5 + i64(rng() % 28)));
        // mixed sizes must be rejected, equal sizes must satisfy the inequality
        bool equal = true;
        for (auto& g : fs) equal = equal && g.N == fs[0].N;
        if (!equal) {
            CHECK_THROWS_AS(gowers_inner(fs, 2), ShapeError);
            continue;
        }
        auto [lhs, rhs] = csg_check(fs, 2);
        CHECK(lhs <= rhs + 1e-12);
    }
    CHECK_THROWS_AS(gowers_inner(std::vector<ComplexSignal>(3, f), 2), ShapeError);
}

TEST_CASE("derivative recursion identity on Z/N") {
    ComplexSignal one = make_signal(std::vector<cplx>(16, cplx{1.0, 0.0}));
    auto [l1, r1] = seminorm_recursion_check(one, 2);
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));

    ComplexSignal chi = character_signal(8, 5);
    auto [l2, r2] = seminorm_recursion_check(chi, 2);
    CHECK(l2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(l2 - r2) <= 1e-10);

    std::mt19937_64 rng(99);
    for (i64 N : {8, 16, 32}) {
        for (i64 k : {1, 2}) {
            for (int t = 0; t < 10; ++t) {
                ComplexSignal f = random_signal(rng, N);
                auto [lhs, rhs] = seminorm_recursion_check(f, k);
                CHECK(std::fabs(lhs - rhs) <= 1e-10);
                // the left side is also the direct (k+1)-order power
                double direct = std::pow(gowers_norm(f, k + 1).value, double(i64(1) << (k + 1)));
                CHECK(std::fabs(lhs - direct) <= 1e-10);
            }
        }
    }
    CHECK_THROWS_AS(seminorm_recursion_check(one, 4), DomainError);
}

TEST_CASE("cube samples: parallelogram faces, grids, marginals") {
    std::mt19937_64 rng(2718);
    SystemSpec cyc = make_cyclic(64, 1);
    SystemSpec rot = make_rotation({alpha_sqrt2m1(), alpha_golden()});

    for (i64 k = 1; k <= 3; ++k) {
        for (int t = 0; t < 50; ++t) {
            CubeSample cs = cube_sample(cyc, k, rng);
            REQUIRE(cs.vertices.size() == size_t(1) << k);
            // every 2-face has alternating residue sum 0 mod N
            for (i64 i = 0; i < k; ++i)
                for (i64 j = i + 1; j < k; ++j)
                    for (i64 m = 0; m < (i64(1) << k); ++m) {
                        if (((m >> i) & 1) || ((m >> j) & 1)) continue;
                        i64 s = cs.vertices[size_t(m)].residue -
                                cs.vertices[size_t(m | (i64(1) << i))].residue -
                                cs.vertices[size_t(m | (i64(1) << j))].residue +
                                cs.vertices[size_t(m | (i64(1) << i) | (i64(1) << j))].residue;
                        CHECK(((s % 64) + 64) % 64 == 0);
                    }
            CubeSample ct = cube_sample(rot, k, rng);
            for (i64 i = 0; i < k; ++i)
                for (i64 j = i + 1; j < k; ++j)
                    for (i64 m = 0; m < (i64(1) << k); ++m) {
                        if (((m >> i) & 1) || ((m >> j) & 1)) continue;
                        for (int c = 0; c < 2; ++c) {
                            u64 s = ct.vertices[size_t(m)].t[c].raw -
                                    ct.vertices[size_t(m | (i64(1) << i))].t[c].raw -
                                    ct.vertices[size_t(m | (i64(1) << j))].t[c].raw +
                                    ct.vertices[size_t(m | (i64(1) << i) | (i64(1) << j))].t[c].raw;
                            CHECK(s == 0);
                        }
                    }
        }
    }

    // zero shifts: all vertices coincide with the base point
    CubeSample flat = cube_sample_grid(cyc, 2, 5, 64);
    CHECK(flat.base.residue == 5);
    for (auto& v : flat.vertices) CHECK(v.residue == 5);

    // grid enumeration hits each (z, t) tuple once; index bounds enforced
    CubeSample g1 = cube_sample_grid(cyc, 1, 64 * 7 + 3, 0);
    CHECK(g1.base.residue == 3);
    CHECK(g1.shifts[0].residue == 7);
    CHECK(g1.vertices[1].residue == 10);
    CHECK_THROWS_AS(cube_sample_grid(cyc, 1, 64 * 64, 0), DomainError);
    CHECK_THROWS_AS(cube_sample_grid(make_cyclic(256, 1), 4, 0, 0), GuardError);
    CHECK_THROWS_AS(cube_sample(make_heisenberg(alpha_sqrt2m1(), alpha_golden(), TorusCoord{0}), 2, rng),
                    CapabilityError);

    // vertex marginal is uniform: chi-square over residues of the top vertex
    SystemSpec small = make_cyclic(8, 1);
    std::vector<i64> counts(8, 0);
    for (int t = 0; t < 100000; ++t) {
        CubeSample cs = cube_sample(small, 2, rng);
        counts[size_t(cs.vertices[3].residue)]++;
    }
    double chi2 = 0.0;
    for (i64 c : counts) {
        double e = 100000.0 / 8.0;
        chi2 += (double(c) - e) * (double(c) - e) / e;
    }
    CHECK(chi2 < 40.0);  // 7 dof; generous deterministic bound under the fixed seed
}

TEST_CASE("quadrature box norm on a rotation") {
    SystemSpec rot = make_rotation({alpha_sqrt2m1()});
    for (i64 k = 1; k <= 3; ++k)
        CHECK(rotation_seminorm_quadrature(obs_const(cplx{1.0, 0.0}, 1), rot, k, 64).value ==
              doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rotation_seminorm_quadrature(obs_character({1}), rot, 2, 64).value ==
          doctest::Approx(1.0).epsilon(1e-10));

    // centered half interval: fourth power approaches sum over odd xi of (pi xi)^-4
    Observable centered = obs_sum({obs_indicator(make_interval_set(0, iu_from_pairs({{coord_from_fraction(0, 2), coord_from_fraction(1, 2)}}))),
                                   obs_const(cplx{-0.5, 0.0}, 1)});
    double v = rotation_seminorm_quadrature(centered, rot, 2, 256).value;
    double target = 0.0;
    for (i64 xi = 1; xi <= 100001; xi += 2) target += 2.0 / std::pow(0.5 * kTwoPi * double(xi), 4.0);
    CHECK(std::fabs(std::pow(v, 4.0) - target) <= 1e-3);

    // values nondecreasing in k (exact finite monotonicity on the sampled grid)
    double u1 = rotation_seminorm_quadrature(centered, rot, 1, 128).value;
    double u2 = rotation_seminorm_quadrature(centered, rot, 2, 128).value;
    double u3 = rotation_seminorm_quadrature(centered, rot, 3, 128).value;
    CHECK(u1 <= u2 + 1e-12);
    CHECK(u2 <= u3 + 1e-12);

    CHECK_THROWS_AS(rotation_seminorm_quadrature(obs_character({1}), make_cyclic(8, 1), 2, 16),
                    CapabilityError);
    CHECK_THROWS_AS(
        rotation_seminorm_quadrature(obs_character({1, 1}), make_rotation({alpha_golden(), alpha_golden()}),
                                     2, 16),
        CapabilityError);
    CHECK_THROWS_AS(rotation_seminorm_quadrature(obs_character({1}), rot, 3, 4096), GuardError);
}

TEST_CASE("progression correlation against the weakest box norm") {
    std::vector<ComplexSignal> ones(3, make_signal(std::vector<cplx>(7, cplx{1.0, 0.0})));
    GvnReport r = gvn_ratio(ones, 2);
    CHECK(r.correlation == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<ComplexSignal> with_char = ones;
    for (auto& f : with_char) f = make_signal(std::vector<cplx>(5, cplx{1.0, 0.0}));
    with_char[0] = character_signal(5, 1);
    CHECK(gvn_ratio(with_char, 2).correlation <= 1e-12);

    std::mt19937_64 rng(1618);
    double max_ratio = 0.0;
    for (int t = 0; t < 50; ++t) {
        i64 Ns[4] = {5, 7, 11, 13};
        i64 N = Ns[rng() % 4];
        i64 k = 2 + i64(rng() % 2);
        std::vector<ComplexSignal> fs;
        for (i64 j = 0; j <= k; ++j) fs.push_back(random_phases(rng, N));
        GvnReport g = gvn_ratio(fs, k);
        CHECK(g.correlation <= double(k) * g.bound + 1e-9);
        if (g.bound > 1e-9) max_ratio = std::max(max_ratio, g.ratio);
    }
    MESSAGE("largest measured correlation/bound ratio: " << max_ratio);

    CHECK_THROWS_AS(gvn_ratio(std::vector<ComplexSignal>(3, make_signal(std::vector<cplx>(6, cplx{1.0, 0.0}))), 2),
                    DomainError);
    CHECK_THROWS_AS(gvn_ratio(std::vector<ComplexSignal>(3, make_signal(std::vector<cplx>(7, cplx{2.0, 0.0}))), 2),
                    DomainError);
}

TEST_CASE("order monotonicity") {
    ComplexSignal one = make_signal(std::vector<cplx>(10, cplx{1.0, 0.0}));
    for (auto& g : monotonicity_check(one, 4)) CHECK(g.value == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(1234);
    for (int t = 0; t < 10; ++t) {
        ComplexSignal f = random_signal(rng, 16);
        // remove the mean so the order-1 value is near zero
        cplx m{0.0, 0.0};
        for (auto& c : f.values) m += c;
        m /= 16.0;
        for (auto& c : f.values) c -= m;
        f = make_signal(std::move(f.values));
        auto vals = monotonicity_check(f, 3);
        CHECK(vals[0].value <= 1e-12);
        for (size_t i = 1; i < vals.size(); ++i) CHECK(vals[i - 1].value <= vals[i].value + 1e-12);
    }

    std::vector<cplx> dv(8, cplx{0.0, 0.0});
    dv[0] = cplx{1.0, 0.0};
    auto vals = monotonicity_check(make_signal(std::move(dv)), 3);
    CHECK(vals[0].value == doctest::Approx(1.0 / 8).epsilon(1e-12));
    CHECK(vals[1].value == doctest::Approx(std::pow(8.0, -0.75)).epsilon(1e-12));
    CHECK(vals[2].value == doctest::Approx(std::pow(8.0, -0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(monotonicity_check(make_signal(std::vector<cplx>(4, cplx{1.0, 0.0})), 5), DomainError);
}
