#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergo/averages.hpp"
#include "ergo/combinatorics.hpp"
#include "ergo/observables.hpp"
#include "ergo/recurrence.hpp"
#include "ergo/systems.hpp"

using namespace ergo;

namespace {

TorusCoord fr(i64 p, i64 q) { return coord_from_fraction(p, q); }

// Leading principal minors of a real symmetric matrix, by Gaussian
// elimination with partial pivoting (determinant = signed pivot product).
std::vector<double> leading_minors(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<double> dets;
    for (std::size_t order = 1; order <= n; ++order) {
        std::vector<std::vector<double>> m(order, std::vector<double>(order));
        for (std::size_t i = 0; i < order; ++i)
            for (std::size_t j = 0; j < order; ++j) m[i][j] = a[i][j];
        double det = 1.0;
        for (std::size_t c = 0; c < order; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < order; ++r)
                if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
            if (piv != c) {
                std::swap(m[piv], m[c]);
                det = -det;
            }
            det *= m[c][c];
            if (m[c][c] == 0.0) break;
            for (std::size_t r = c + 1; r < order; ++r) {
                double f = m[r][c] / m[c][c];
                for (std::size_t j = c; j < order; ++j) m[r][j] -= f * m[c][j];
            }
        }
        dets.push_back(det);
    }
    return dets;
}

double circ_dist(double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

// Truncated trigonometric expansion of the half interval [0, 1/2): constant
// 1/2 plus terms -i/(pi xi) e(xi x) over odd |xi| <= max_freq.
Observable half_interval_series(i64 max_freq) {
    std::vector<std::pair<std::vector<i64>, cplx>> terms;
    terms.push_back({{0}, cplx{0.5, 0.0}});
    for (i64 xi = -max_freq; xi <= max_freq; ++xi) {
        if (xi == 0 || (xi % 2 + 2) % 2 == 0) continue;
        terms.push_back({{xi}, cplx{0.0, -1.0 / (kTwoPi * 0.5 * static_cast<double>(xi))}});
    }
    return obs_trig(terms);
}

}  // namespace

TEST_CASE("first return times on exact and grid paths") {
    SystemSpec rot = make_rotation({alpha_golden()});

    SUBCASE("full space returns immediately") {
        auto n = poincare_first_return(rot, make_full(), 10);
        REQUIRE(n.has_value());
        CHECK(*n == 1);
    }

    SUBCASE("single residue in an eight-cycle returns at the period") {
        SystemSpec cyc = make_cyclic(8, 1);
        auto n = poincare_first_return(cyc, make_bitvector(8, {0}), 32);
        REQUIRE(n.has_value());
        CHECK(*n == 8);
        auto half = poincare_first_return(cyc, make_bitvector(8, {0, 4}), 32);
        REQUIRE(half.has_value());
        CHECK(*half == 4);
        CHECK_FALSE(poincare_first_return(cyc, make_bitvector(8, {0}), 7).has_value());
    }

    SUBCASE("golden rotation with a 0.1 arc returns at n = 5") {
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 10), fr(1, 10)}}));
        // Exhaustive oracle: the first positive entry of the intersection
        // sequence past n = 0.
        auto seq = intersection_sequence(rot, A, 1, 16);
        i64 expected = 0;
        for (i64 n = 1; n < static_cast<i64>(seq.size()); ++n)
            if (seq[static_cast<std::size_t>(n)] > 0.0) {
                expected = n;
                break;
            }
        CHECK(expected == 5);
        auto n = poincare_first_return(rot, A, 100);
        REQUIRE(n.has_value());
        CHECK(*n == 5);
        CHECK_FALSE(poincare_first_return(rot, A, 4).has_value());
    }

    SUBCASE("grid path on a skew product") {
        SystemSpec skew = make_skew(alpha_golden(), false);
        SetSpec A = make_cylinder({iu_from_pairs({{fr(0, 2), fr(1, 2)}}), iu_full()});
        auto n = poincare_first_return(skew, A, 10, 64);
        REQUIRE(n.has_value());
        CHECK(*n == 1);  // the x-interval of length 1/2 overlaps its own shift
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(poincare_first_return(rot, make_interval_set(0, iu_from_pairs({})), 10),
                        DomainError);
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 10), fr(1, 10)}}));
        CHECK_THROWS_AS(poincare_first_return(rot, A, 0), DomainError);
    }
}

TEST_CASE("recurrence scans mark the large-intersection times") {
    SystemSpec rot = make_rotation({alpha_golden()});
    SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 4), fr(1, 4)}}));

    SUBCASE("quarter arc, k = 1: good times exist and the gap is syndetic-sized") {
        ScanReport r = khintchine_scan(rot, A, 1, 0.01, 2000);
        CHECK(r.k == 1);
        CHECK(r.horizon == 2000);
        CHECK(r.threshold == doctest::Approx(0.25 * 0.25 - 0.01).epsilon(1e-12));
        CHECK(r.values.size() == 2001);
        CHECK(r.values[0] == doctest::Approx(0.25).epsilon(1e-12));
        auto good = r.good_set.to_list();
        REQUIRE(!good.empty());
        CHECK(r.max_gap <= 100);

        // Reproducibility: membership is exactly the threshold comparison.
        for (i64 n = 1; n <= 2000; ++n) {
            bool marked = r.good_set.contains(n);
            bool expected = r.values[static_cast<std::size_t>(n)] > r.threshold;
            REQUIRE(marked == expected);
        }

        // Gap recomputed from the raw list: lead-in, consecutive, tail.
        i64 gap = good.front() - 1;
        for (std::size_t i = 1; i < good.size(); ++i)
            gap = std::max(gap, good[i] - good[i - 1]);
        gap = std::max(gap, 2000 - good.back());
        CHECK(gap == r.max_gap);
    }

    SUBCASE("a slack tolerance marks every time") {
        ScanReport r = khintchine_scan(rot, A, 2, 1.0, 50);
        CHECK(r.threshold < 0.0);
        CHECK(r.good_set.size() == 50);
        CHECK(r.max_gap == 1);
    }

    SUBCASE("cyclic double intersections agree with a direct count") {
        SystemSpec cyc = make_cyclic(8, 1);
        SetSpec A8 = make_bitvector(8, {0, 1, 2, 3});
        ScanReport r = khintchine_scan(cyc, A8, 2, 0.05, 16);
        for (i64 n = 0; n <= 16; ++n) {
            i64 cnt = 0;
            for (i64 x = 0; x < 8; ++x) {
                bool in0 = x <= 3;
                bool in1 = (x + n) % 8 <= 3;
                bool in2 = (x + 2 * n) % 8 <= 3;
                if (in0 && in1 && in2) ++cnt;
            }
            REQUIRE(r.values[static_cast<std::size_t>(n)] == static_cast<double>(cnt) / 8.0);
        }
        CHECK(r.good_set.contains(8));  // full period: measure 1/2 > 1/8 - 0.05
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(khintchine_scan(rot, A, 0, 0.01, 10), DomainError);
        CHECK_THROWS_AS(khintchine_scan(rot, A, 4, 0.01, 10), DomainError);
        CHECK_THROWS_AS(khintchine_scan(rot, A, 1, 0.01, 0), DomainError);
    }
}

TEST_CASE("triple intersections of the progression-packed cylinder stay small") {
    SUBCASE("hand lattice oracle at L = 4") {
        CounterexampleReport r = triple_counterexample(4, 8);
        CHECK(r.set_size == 3);  // greedy progression-free set {0, 1, 3}
        CHECK(r.m_B == 3.0 / 16.0);
        CHECK(r.mu_A == r.m_B);

        // Independent reconstruction of the 32-cell circle: slots 0, 1, 3,
        // cells 4j and 4j+1.
        std::vector<int> cells(32, 0);
        for (i64 j : {0, 1, 3}) cells[static_cast<std::size_t>(4 * j)] = cells[static_cast<std::size_t>(4 * j + 1)] = 1;
        i64 brute = 0;
        for (i64 s = 0; s < 32; ++s)
            for (i64 c = 0; c < 32; ++c)
                if (cells[static_cast<std::size_t>(c)] && cells[static_cast<std::size_t>((c + s) % 32)] &&
                    cells[static_cast<std::size_t>((c + 2 * s) % 32)])
                    ++brute;
        CHECK(brute == r.lattice_count);
        CHECK(r.lattice_count == 2 * r.set_size);  // only the zero shift survives
        CHECK(r.integral_value == static_cast<double>(brute) / 1024.0);
    }

    SUBCASE("shift-parameter substitution makes every direct value identical") {
        for (i64 L : {4, 8, 16}) {
            CounterexampleReport r = triple_counterexample(L, 24);
            CHECK(r.direct_values.size() == 24);
            for (double v : r.direct_values) REQUIRE(v == r.integral_value);
            CHECK(r.sup_intersection == r.integral_value);
            CHECK(r.sup_intersection <= r.bound);
            // The packed construction achieves exactly half the proven bound.
            CHECK(std::fabs(r.bound - 2.0 * r.integral_value) <= 1e-15);
            CHECK(r.lattice_count == 2 * r.set_size);
        }
    }

    SUBCASE("the L = 32 report beats the double-recurrence yardstick") {
        CounterexampleReport r = triple_counterexample(32, 64);
        CHECK(r.set_size == 12);
        CHECK(r.sup_intersection == r.integral_value);
        CHECK(r.sup_intersection <= r.bound);
        CHECK(r.best_ell == 3);
        CHECK(r.best_ell >= 2);
    }

    SUBCASE("exact integral equals midpoint quadrature of the slice measure") {
        CounterexampleReport r = triple_counterexample(4, 4);
        const i64 L = 4, M = 4096;
        IntervalUnion B = iu_from_pairs({{fr(0, 16), fr(1, 16)},
                                         {fr(2, 16), fr(3, 16)},
                                         {fr(6, 16), fr(7, 16)}});
        CHECK(B.measure() == r.m_B);
        (void)L;
        double mean = 0.0;
        for (i64 i = 0; i < M; ++i) {
            TorusCoord x = coord_from_fraction(2 * i + 1, 2 * M);
            IntervalUnion inter = iu_intersect(B, iu_shift(B, (-1) * x));
            inter = iu_intersect(inter, iu_shift(B, (-2) * x));
            mean += inter.measure();
        }
        mean /= static_cast<double>(M);
        CHECK(std::fabs(mean - r.integral_value) <= 2.0 / static_cast<double>(M));
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(triple_counterexample(1), DomainError);
        CHECK_THROWS_AS(triple_counterexample(4, 0), DomainError);
        CHECK_THROWS_AS(triple_counterexample(3000, 64), GuardError);
    }
}

TEST_CASE("correlation sequences across exact and quadrature paths") {
    SystemSpec rot = make_rotation({alpha_golden()});

    SUBCASE("a character correlates to its own eigenvalue sequence") {
        Observable f = obs_character({1});
        MulticorrelationSeries s = multicorrelation(rot, f, 1, 20, 64);
        CHECK(s.k == 1);
        CHECK(s.system_kind == "rotation");
        CHECK(s.observable_kind == "character");
        REQUIRE(s.values.size() == 21);
        for (i64 n = 0; n <= 20; ++n) {
            cplx expected = unit_phase((n * alpha_golden()).to_real());
            CHECK(std::abs(s.values[static_cast<std::size_t>(n)] - expected) <= 1e-12);
        }
        cplx neg = multicorrelation_at(rot, f, 1, -7, 64);
        cplx pos = multicorrelation_at(rot, f, 1, 7, 64);
        CHECK(std::abs(neg - std::conj(pos)) <= 1e-12);
    }

    SUBCASE("indicator series equals the intersection sequence exactly") {
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 4), fr(1, 4)}}));
        MulticorrelationSeries s = multicorrelation(rot, obs_indicator(A), 2, 50);
        auto seq = intersection_sequence(rot, A, 2, 50);
        REQUIRE(s.values.size() == seq.size());
        for (std::size_t n = 0; n < seq.size(); ++n) {
            REQUIRE(s.values[n].imag() == 0.0);
            REQUIRE(s.values[n].real() == seq[n]);
        }
    }

    SUBCASE("reversing time reflects the set correlation") {
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 10), fr(3, 10)}}));
        Observable f = obs_indicator(A);
        for (i64 n : {1, 2, 5, 12, 33}) {
            cplx fwd = multicorrelation_at(rot, f, 1, n);
            cplx rev = multicorrelation_at(rot, f, 1, -n);
            REQUIRE(fwd == rev);
        }
    }

    SUBCASE("cyclic indicator correlations match a residue count") {
        SystemSpec cyc = make_cyclic(9, 2);
        SetSpec A = make_bitvector(9, {0, 1, 4});
        MulticorrelationSeries s = multicorrelation(cyc, obs_indicator(A), 1, 12);
        for (i64 n = 0; n <= 12; ++n) {
            i64 cnt = 0;
            for (i64 x : {0, 1, 4})
                for (i64 y : {0, 1, 4})
                    if ((x + 2 * n) % 9 == y) ++cnt;
            REQUIRE(s.values[static_cast<std::size_t>(n)].real() ==
                    static_cast<double>(cnt) / 9.0);
        }
    }

    SUBCASE("real observables stay real on the quadrature path") {
        SystemSpec skew = make_skew(alpha_sqrt2m1(), false);
        Observable f = obs_sum({obs_scale(cplx{0.5, 0.0}, obs_character({0, 1})),
                                obs_scale(cplx{0.5, 0.0}, obs_character({0, -1}))});
        MulticorrelationSeries s = multicorrelation(skew, f, 2, 6, 48);
        CHECK(s.system_kind == "skew");
        for (const cplx& v : s.values) {
            CHECK(std::fabs(v.imag()) <= 1e-12);
            CHECK(std::abs(v) <= sup_norm_bound(f) * sup_norm_bound(f) * sup_norm_bound(f) + 1e-9);
        }
    }

    SUBCASE("correlations are bounded by the sup-norm power") {
        Observable f = obs_trig({{{0}, cplx{0.3, 0.1}},
                                 {{1}, cplx{0.2, -0.4}},
                                 {{3}, cplx{-0.1, 0.25}}});
        for (i64 k : {1, 2}) {
            double cap = std::pow(sup_norm_bound(f), static_cast<double>(k + 1)) + 1e-9;
            MulticorrelationSeries s = multicorrelation(rot, f, k, 30, 32);
            for (const cplx& v : s.values) REQUIRE(std::abs(v) <= cap);
        }
    }

    SUBCASE("order-1 correlations of a set form a positive-definite sequence") {
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 10), fr(3, 10)}}));
        MulticorrelationSeries s = multicorrelation(rot, obs_indicator(A), 1, 5);
        std::vector<std::vector<double>> toeplitz(6, std::vector<double>(6));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                toeplitz[i][j] = s.values[static_cast<std::size_t>(
                                              std::llabs(static_cast<long long>(i) -
                                                         static_cast<long long>(j)))]
                                     .real();
        for (double det : leading_minors(toeplitz)) CHECK(det >= -1e-9);
    }

    SUBCASE("validation") {
        Observable f = obs_character({1});
        CHECK_THROWS_AS(multicorrelation_at(rot, f, 0, 1), DomainError);
        CHECK_THROWS_AS(multicorrelation(rot, f, 1, -1), DomainError);
        SystemSpec skew = make_skew(alpha_golden(), false);
        CHECK_THROWS_AS(multicorrelation_at(skew, obs_character({0, 1}), 1, 1, 16384), GuardError);
    }
}

TEST_CASE("spectral decomposition, exact path") {
    SystemSpec rot = make_rotation({alpha_golden()});

    SUBCASE("one character, one atom") {
        SpectralMeasure sm = spectral_decompose_k1(rot, obs_character({1}));
        REQUIRE(sm.atoms.size() == 1);
        CHECK(sm.atoms[0].frequency == alpha_golden().to_real());
        CHECK(sm.atoms[0].weight == 1.0);
        CHECK(sm.continuous_part_mass == 0.0);
        CHECK(sm.total_mass == 1.0);
    }

    SUBCASE("a constant sits at frequency zero with its squared modulus") {
        SpectralMeasure sm = spectral_decompose_k1(rot, obs_const(cplx{2.0, 1.0}, 1));
        REQUIRE(sm.atoms.size() == 1);
        CHECK(sm.atoms[0].frequency == 0.0);
        CHECK(sm.atoms[0].weight == doctest::Approx(5.0).epsilon(1e-15));
    }

    SUBCASE("products and conjugates reduce through the expansion") {
        Observable e1 = obs_character({1});
        SpectralMeasure sm = spectral_decompose_k1(rot, obs_product({e1, obs_conj(e1)}));
        REQUIRE(sm.atoms.size() == 1);
        CHECK(sm.atoms[0].frequency == 0.0);
        CHECK(sm.atoms[0].weight == doctest::Approx(1.0).epsilon(1e-15));

        SpectralMeasure zero =
            spectral_decompose_k1(rot, obs_sum({e1, obs_scale(cplx{-1.0, 0.0}, e1)}));
        CHECK(zero.atoms.empty());
        CHECK(zero.total_mass == 0.0);
    }

    SUBCASE("two-coordinate characters land on the lattice combination") {
        SystemSpec rot2 = make_rotation({alpha_golden(), alpha_sqrt2m1()});
        SpectralMeasure sm = spectral_decompose_k1(rot2, obs_character({1, 1}));
        REQUIRE(sm.atoms.size() == 1);
        CHECK(sm.atoms[0].frequency == (alpha_golden() + alpha_sqrt2m1()).to_real());
    }

    SUBCASE("truncated half-interval expansion: squared coefficients as weights") {
        Observable f = half_interval_series(21);
        SpectralMeasure sm = spectral_decompose_k1(rot, f);
        REQUIRE(sm.atoms.size() == 23);  // zero frequency plus 22 odd harmonics
        CHECK(sm.atoms[0].frequency == 0.0);
        CHECK(sm.atoms[0].weight == doctest::Approx(0.25).epsilon(1e-15));
        const double pi = 0.5 * kTwoPi;
        for (i64 xi : {1, 3, 5}) {
            double expect = 1.0 / (pi * pi * static_cast<double>(xi) * static_cast<double>(xi));
            double at = (xi * alpha_golden()).to_real();
            bool seen = false;
            for (const auto& a : sm.atoms)
                if (a.frequency == at) {
                    CHECK(a.weight == doctest::Approx(expect).epsilon(1e-12));
                    seen = true;
                }
            CHECK(seen);
        }
        // Mass accounting: the total equals the order-0 correlation.
        cplx i0 = multicorrelation_at(rot, f, 1, 0, 64);
        CHECK(std::fabs(sm.total_mass - i0.real()) <= 1e-9);
        // Sorted by weight, heaviest first.
        for (std::size_t i = 1; i < sm.atoms.size(); ++i)
            CHECK(sm.atoms[i - 1].weight >= sm.atoms[i].weight);
    }

    SUBCASE("capability limits") {
        SetSpec A = make_interval_set(0, iu_from_pairs({{fr(0, 2), fr(1, 2)}}));
        CHECK_THROWS_AS(spectral_decompose_k1(rot, obs_indicator(A)), CapabilityError);
        CHECK_THROWS_AS(spectral_decompose_k1(make_cyclic(8, 1), obs_const(cplx{1.0, 0.0}, 1)),
                        CapabilityError);
    }
}

TEST_CASE("spectral decomposition, empirical path") {
    SUBCASE("synthetic two-atom series") {
        const i64 W = 512;
        std::vector<cplx> series(static_cast<std::size_t>(W));
        for (i64 n = 0; n < W; ++n)
            series[static_cast<std::size_t>(n)] =
                cplx{0.6, 0.0} + cplx{0.3, 0.0} * unit_phase(0.31 * static_cast<double>(n));
        SpectralMeasure sm = spectral_decompose_k1(series);
        REQUIRE(sm.atoms.size() >= 2);
        CHECK(circ_dist(sm.atoms[0].frequency, 0.0) <= 1e-3);
        CHECK(std::fabs(sm.atoms[0].weight - 0.6) <= 0.01);
        CHECK(circ_dist(sm.atoms[1].frequency, 0.31) <= 1e-3);
        CHECK(std::fabs(sm.atoms[1].weight - 0.3) <= 0.01);
        CHECK(sm.total_mass == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(sm.continuous_part_mass <= 0.02);

        SpectralMeasure again = spectral_decompose_k1(series);
        REQUIRE(again.atoms.size() == sm.atoms.size());
        for (std::size_t i = 0; i < sm.atoms.size(); ++i) {
            CHECK(again.atoms[i].frequency == sm.atoms[i].frequency);
            CHECK(again.atoms[i].weight == sm.atoms[i].weight);
        }
    }

    SUBCASE("recovers the top atoms of the half-interval expansion") {
        SystemSpec rot = make_rotation({alpha_golden()});
        Observable f = half_interval_series(21);
        MulticorrelationSeries s = multicorrelation(rot, f, 1, 511, 64);
        SpectralMeasure sm = spectral_decompose_k1(s.values);
        REQUIRE(sm.atoms.size() >= 2);

        CHECK(circ_dist(sm.atoms[0].frequency, 0.0) <= 2e-3);
        CHECK(std::fabs(sm.atoms[0].weight - 0.25) <= 0.025);

        const double pi = 0.5 * kTwoPi;
        double first_harmonic = 1.0 / (pi * pi);
        double a = alpha_golden().to_real();
        CHECK(std::min(circ_dist(sm.atoms[1].frequency, a),
                       circ_dist(sm.atoms[1].frequency, 1.0 - a)) <= 2e-3);
        CHECK(std::fabs(sm.atoms[1].weight - first_harmonic) <= 0.1 * first_harmonic);

        // Mass accounting within five percent of the zero-lag value.
        double recovered = sm.continuous_part_mass;
        for (const auto& atom : sm.atoms) recovered += atom.weight;
        CHECK(std::fabs(recovered - s.values[0].real()) <= 0.05 * s.values[0].real());
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(spectral_decompose_k1(std::vector<cplx>(4, cplx{1.0, 0.0})), ShapeError);
    }
}
