#include "ergo/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ergo/fft.hpp"
#include "ergo/parallel.hpp"

namespace ergo {

namespace {

std::vector<i64> decode_axes(const std::vector<i64>& sizes, i64 cell) {
    std::vector<i64> idx(sizes.size());
    i64 rem = cell;
    for (std::size_t a = sizes.size(); a-- > 0;) {
        idx[a] = rem % sizes[a];
        rem /= sizes[a];
    }
    return idx;
}

void check_work32(u128 total, const char* what) {
    if (total > (u128(1) << 32))
        throw GuardError(std::string(what) + ": requested work exceeds the 2^32 budget");
}

// Per-torus-coordinate interval factors of a set on a d-dimensional rotation,
// or nullopt when the (system, set) pair has no such exact form.
std::optional<std::vector<IntervalUnion>> rotation_factors(const SystemSpec& sys, const SetSpec& A) {
    if (sys.kind != SystemKind::Rotation) return std::nullopt;
    const i64 d = coord_count(sys);
    std::vector<IntervalUnion> base(static_cast<std::size_t>(d), iu_full());
    if (A.kind == SetSpec::Kind::TorusIntervals) {
        if (A.coord >= d) throw ShapeError("recurrence: coordinate out of range");
        base[static_cast<std::size_t>(A.coord)] = A.intervals;
        return base;
    }
    if (A.kind == SetSpec::Kind::CylinderProduct) {
        if (static_cast<i64>(A.cylinder.size()) != d)
            throw ShapeError("recurrence: cylinder arity mismatch");
        return A.cylinder;
    }
    return std::nullopt;
}

const char* system_kind_name(SystemKind k) {
    switch (k) {
        case SystemKind::Cyclic: return "cyclic";
        case SystemKind::Rotation: return "rotation";
        case SystemKind::SkewPlain: return "skew";
        case SystemKind::SkewNil: return "skew-nil";
        case SystemKind::Skew3: return "skew3";
        case SystemKind::Heisenberg: return "heisenberg";
        case SystemKind::Product: return "product";
        case SystemKind::Commuting: return "commuting";
    }
    return "unknown";
}

const char* observable_kind_name(Observable::Kind k) {
    switch (k) {
        case Observable::Kind::Character: return "character";
        case Observable::Kind::TrigPoly: return "trig-poly";
        case Observable::Kind::Indicator: return "indicator";
        case Observable::Kind::Conjugate: return "conjugate";
        case Observable::Kind::Product: return "product";
        case Observable::Kind::Sum: return "sum";
        case Observable::Kind::Scale: return "scale";
    }
    return "unknown";
}

}  // namespace

std::optional<i64> poincare_first_return(const SystemSpec& sys, const SetSpec& A, i64 horizon,
                                         i64 grid_M) {
    if (horizon < 1) throw DomainError("first return: horizon must be at least 1");
    if (set_measure(A, sys) <= 0.0) throw DomainError("first return: the set has measure zero");

    if (A.kind == SetSpec::Kind::FullSpace) return 1;

    if (auto base = rotation_factors(sys, A)) {
        const i64 d = static_cast<i64>(base->size());
        for (i64 n = 1; n <= horizon; ++n) {
            bool positive = true;
            for (i64 c = 0; c < d && positive; ++c) {
                const IntervalUnion& f = (*base)[static_cast<std::size_t>(c)];
                IntervalUnion inter =
                    iu_intersect(f, iu_shift(f, (-n) * sys.alpha[static_cast<std::size_t>(c)]));
                positive = inter.measure_raw() != 0;
            }
            if (positive) return n;
        }
        return std::nullopt;
    }

    if (sys.kind == SystemKind::Cyclic && A.kind == SetSpec::Kind::BitVectorSet) {
        if (A.modulus != sys.modulus) throw ShapeError("first return: modulus mismatch");
        const i64 Ns = sys.modulus;
        for (i64 n = 1; n <= horizon; ++n) {
            i64 e = n % Ns * sys.shift % Ns;
            SetSpec rolled = rotate_bits(A, -e);
            for (i64 r = 0; r < Ns; ++r)
                if (A.bits[static_cast<std::size_t>(r)] && rolled.bits[static_cast<std::size_t>(r)])
                    return n;
        }
        return std::nullopt;
    }

    // General systems: a grid cell counts as recurrent when both the cell and
    // its n-step image lie in the set.
    const i64 G = grid_total(sys, grid_M);
    check_work32(u128(G) * u128(horizon), "first return");
    auto sizes = grid_axis_sizes(sys, grid_M);
    std::vector<char> member(static_cast<std::size_t>(G), 0);
    std::vector<PhasePoint> pts;
    pts.reserve(static_cast<std::size_t>(G));
    for (i64 cell = 0; cell < G; ++cell) {
        PhasePoint x = point_from_axes(sys, decode_axes(sizes, cell), grid_M);
        member[static_cast<std::size_t>(cell)] = set_contains(A, sys, x) ? 1 : 0;
        pts.push_back(std::move(x));
    }
    for (i64 n = 1; n <= horizon; ++n)
        for (i64 cell = 0; cell < G; ++cell)
            if (member[static_cast<std::size_t>(cell)] &&
                set_contains(A, sys, iterate(sys, pts[static_cast<std::size_t>(cell)], n)))
                return n;
    return std::nullopt;
}

ScanReport khintchine_scan(const SystemSpec& sys, const SetSpec& A, i64 k, double eps, i64 horizon,
                           i64 grid_M, int threads) {
    if (k < 1 || k > 3) throw DomainError("recurrence scan: k must be 1, 2, or 3");
    if (horizon < 1) throw DomainError("recurrence scan: horizon must be at least 1");

    ScanReport r;
    r.k = k;
    r.horizon = horizon;
    const double mu = set_measure(A, sys);
    r.threshold = std::pow(mu, static_cast<double>(k + 1)) - eps;
    r.values = intersection_sequence(sys, A, k, horizon, grid_M, threads);

    std::vector<i64> good;
    for (i64 n = 1; n <= horizon; ++n)
        if (r.values[static_cast<std::size_t>(n)] > r.threshold) good.push_back(n);
    r.good_set = make_window_set(horizon + 1, good);

    if (good.empty()) {
        r.max_gap = horizon;
    } else {
        std::vector<i64> shifted;
        shifted.reserve(good.size());
        for (i64 n : good) shifted.push_back(n - 1);
        r.max_gap = syndetic_gap(make_window_set(horizon, shifted)).first;
    }
    return r;
}

CounterexampleReport triple_counterexample(i64 L, i64 sup_horizon) {
    if (sup_horizon < 1) throw DomainError("counterexample: sup horizon must be at least 1");
    IntegerWindowSet E = behrend_set(L);  // rejects L < 2, guards huge L

    const i64 m = 8 * L;  // lattice cells per circle
    check_work32(u128(m) * u128(m) +
                     u128(m) * u128(m) * u128(sup_horizon) * u128(sup_horizon + 1) / 2,
                 "counterexample");

    // One cell = 1/(8L).  Slot j of the free set contributes [4j, 4j+2).
    std::vector<char> C(static_cast<std::size_t>(m), 0);
    for (i64 j : E.to_list()) {
        C[static_cast<std::size_t>(4 * j)] = 1;
        C[static_cast<std::size_t>(4 * j + 1)] = 1;
    }

    // The intersection measure at shift x = s/(8L) is (cells in
    // B cap (B - x) cap (B - 2x)) / (8L); the map x -> measure is piecewise
    // linear with every breakpoint on the lattice, so its integral over the
    // circle is exactly the lattice average.
    i64 count_sum = 0;
    for (i64 s = 0; s < m; ++s)
        for (i64 c = 0; c < m; ++c)
            if (C[static_cast<std::size_t>(c)] && C[static_cast<std::size_t>((c + s) % m)] &&
                C[static_cast<std::size_t>((c + 2 * s) % m)])
                ++count_sum;

    CounterexampleReport r;
    r.L = L;
    r.set_size = E.size();
    r.m_B = static_cast<double>(r.set_size) / static_cast<double>(4 * L);
    r.mu_A = r.m_B;
    r.lattice_count = count_sum;
    r.integral_value =
        static_cast<double>(count_sum) / (static_cast<double>(m) * static_cast<double>(m));
    r.sup_horizon = sup_horizon;
    r.bound = r.m_B / static_cast<double>(4 * L);

    // Direct value at each n over its own refinement x = t/(8nL): the shifts
    // n x and 2n x land back on the coarse lattice, so the integrand stays
    // exact while the parametrization covers the circle n times.
    r.direct_values.reserve(static_cast<std::size_t>(sup_horizon));
    double sup = 0.0;
    for (i64 n = 1; n <= sup_horizon; ++n) {
        const i64 rows = m * n;
        i64 total_n = 0;
        for (i64 t = 0; t < rows; ++t) {
            const i64 s1 = t % m;
            const i64 s2 = (2 * t) % m;
            for (i64 c = 0; c < m; ++c)
                if (C[static_cast<std::size_t>(c)] && C[static_cast<std::size_t>((c + s1) % m)] &&
                    C[static_cast<std::size_t>((c + s2) % m)])
                    ++total_n;
        }
        double v = static_cast<double>(total_n) /
                   (static_cast<double>(rows) * static_cast<double>(m));
        r.direct_values.push_back(v);
        sup = std::max(sup, v);
    }
    r.sup_intersection = sup;

    i64 ell = 0;
    double power = 1.0;
    while (ell < 128) {
        power *= r.mu_A;
        if (sup <= power / 2.0)
            ++ell;
        else
            break;
    }
    r.best_ell = ell;
    return r;
}

cplx multicorrelation_at(const SystemSpec& sys, const Observable& f, i64 k, i64 n,
                         i64 M, int threads) {
    if (k < 1) throw DomainError("multicorrelation: k must be at least 1");

    if (f.kind == Observable::Kind::Indicator) {
        const SetSpec& A = f.set;
        if (A.kind == SetSpec::Kind::FullSpace) return cplx{1.0, 0.0};

        if (auto base = rotation_factors(sys, A)) {
            const i64 d = static_cast<i64>(base->size());
            double mu = 1.0;
            for (i64 c = 0; c < d; ++c) {
                IntervalUnion inter = (*base)[static_cast<std::size_t>(c)];
                for (i64 j = 1; j <= k && !inter.empty(); ++j) {
                    i64 e = checked_i64(i128(j) * n, "multicorrelation shift");
                    inter = iu_intersect(inter, iu_shift((*base)[static_cast<std::size_t>(c)],
                                                         (-e) * sys.alpha[static_cast<std::size_t>(c)]));
                }
                mu *= inter.measure();
            }
            return cplx{mu, 0.0};
        }

        if (sys.kind == SystemKind::Cyclic && A.kind == SetSpec::Kind::BitVectorSet) {
            if (A.modulus != sys.modulus) throw ShapeError("multicorrelation: modulus mismatch");
            const i64 Ns = sys.modulus;
            std::vector<bool> inter = A.bits;
            for (i64 j = 1; j <= k; ++j) {
                i64 e = checked_i64(i128(j) * n % Ns * sys.shift % Ns, "multicorrelation shift");
                SetSpec rolled = rotate_bits(A, -e);
                for (i64 r = 0; r < Ns; ++r)
                    inter[static_cast<std::size_t>(r)] =
                        inter[static_cast<std::size_t>(r)] && rolled.bits[static_cast<std::size_t>(r)];
            }
            i64 pop = 0;
            for (bool b : inter) pop += b ? 1 : 0;
            return cplx{static_cast<double>(pop) / static_cast<double>(Ns), 0.0};
        }
    }

    const i64 G = grid_total(sys, M);
    check_work32(u128(G) * u128(k + 1), "multicorrelation");
    auto sizes = grid_axis_sizes(sys, M);
    cplx s = det_sum<cplx>(
        G,
        [&](i64 cell) {
            PhasePoint x = point_from_axes(sys, decode_axes(sizes, cell), M);
            cplx term = std::conj(evaluate(f, sys, x));
            for (i64 j = 1; j <= k; ++j) {
                i64 e = checked_i64(i128(j) * n, "multicorrelation shift");
                term *= evaluate(f, sys, iterate(sys, x, e));
            }
            return term;
        },
        threads);
    return s / static_cast<double>(G);
}

MulticorrelationSeries multicorrelation(const SystemSpec& sys, const Observable& f, i64 k,
                                        i64 n_max, i64 M, int threads) {
    if (k < 1) throw DomainError("multicorrelation: k must be at least 1");
    if (n_max < 0) throw DomainError("multicorrelation: n_max must be nonnegative");

    MulticorrelationSeries out;
    out.k = k;
    out.system_kind = system_kind_name(sys.kind);
    out.observable_kind = observable_kind_name(f.kind);
    out.values.reserve(static_cast<std::size_t>(n_max) + 1);
    for (i64 n = 0; n <= n_max; ++n) out.values.push_back(multicorrelation_at(sys, f, k, n, M, threads));
    return out;
}

namespace {

// Trigonometric expansion of an observable: frequency vector -> coefficient.
// Indicators have no finite expansion and are rejected.
void trig_terms(const Observable& f, std::map<std::vector<i64>, cplx>& out, cplx scale) {
    switch (f.kind) {
        case Observable::Kind::Character:
            out[f.freq] += scale;
            return;
        case Observable::Kind::TrigPoly:
            for (const auto& [xi, c] : f.terms) out[xi] += scale * c;
            return;
        case Observable::Kind::Sum:
            for (const auto& g : f.children) trig_terms(g, out, scale);
            return;
        case Observable::Kind::Scale:
            trig_terms(f.children.at(0), out, scale * f.factor);
            return;
        case Observable::Kind::Conjugate: {
            std::map<std::vector<i64>, cplx> inner;
            trig_terms(f.children.at(0), inner, cplx{1.0, 0.0});
            for (const auto& [xi, c] : inner) {
                std::vector<i64> neg(xi.size());
                for (std::size_t i = 0; i < xi.size(); ++i) neg[i] = -xi[i];
                out[neg] += scale * std::conj(c);
            }
            return;
        }
        case Observable::Kind::Product: {
            std::map<std::vector<i64>, cplx> acc;
            bool first = true;
            for (const auto& g : f.children) {
                std::map<std::vector<i64>, cplx> part;
                trig_terms(g, part, cplx{1.0, 0.0});
                if (first) {
                    acc = std::move(part);
                    first = false;
                    continue;
                }
                std::map<std::vector<i64>, cplx> next;
                for (const auto& [xa, ca] : acc)
                    for (const auto& [xb, cb] : part) {
                        std::vector<i64> sum(xa.size());
                        if (xa.size() != xb.size())
                            throw ShapeError("spectral decomposition: frequency arity mismatch");
                        for (std::size_t i = 0; i < xa.size(); ++i) sum[i] = xa[i] + xb[i];
                        next[sum] += ca * cb;
                    }
                acc = std::move(next);
            }
            if (first) {  // empty product is the constant 1, carried by the zero frequency
                out[std::vector<i64>{}] += scale;
                return;
            }
            for (const auto& [xi, c] : acc) out[xi] += scale * c;
            return;
        }
        case Observable::Kind::Indicator:
            throw CapabilityError("spectral decomposition: needs a trigonometric expansion");
    }
    throw CapabilityError("spectral decomposition: unsupported observable");
}

}  // namespace

SpectralMeasure spectral_decompose_k1(const SystemSpec& sys, const Observable& f) {
    if (sys.kind != SystemKind::Rotation)
        throw CapabilityError("spectral decomposition: exact path needs a torus rotation");
    const i64 d = coord_count(sys);

    std::map<std::vector<i64>, cplx> terms;
    trig_terms(f, terms, cplx{1.0, 0.0});

    // Coefficients were combined per integer frequency above; distinct integer
    // frequencies meeting at one spectral point merge additively below.
    std::map<u64, double> mass;
    for (const auto& [xi, c] : terms) {
        if (std::norm(c) == 0.0) continue;
        if (static_cast<i64>(xi.size()) != d)
            throw ShapeError("spectral decomposition: frequency arity mismatch");
        TorusCoord theta{0};
        for (i64 i = 0; i < d; ++i)
            theta = theta + xi[static_cast<std::size_t>(i)] * sys.alpha[static_cast<std::size_t>(i)];
        mass[theta.raw] += std::norm(c);
    }

    SpectralMeasure sm;
    for (const auto& [raw, w] : mass) {
        sm.atoms.push_back({TorusCoord{raw}.to_real(), w});
        sm.total_mass += w;
    }
    std::sort(sm.atoms.begin(), sm.atoms.end(),
              [](const SpectralAtom& a, const SpectralAtom& b) { return a.weight > b.weight; });
    sm.continuous_part_mass = 0.0;
    return sm;
}

SpectralMeasure spectral_decompose_k1(const std::vector<cplx>& series, double peak_factor) {
    const i64 W = static_cast<i64>(series.size());
    if (W < 8) throw ShapeError("spectral decomposition: window must hold at least 8 values");

    const auto amplitude = [&](double theta) {
        cplx s{0.0, 0.0};
        for (i64 n = 0; n < W; ++n)
            s += series[static_cast<std::size_t>(n)] *
                 unit_phase(-theta * static_cast<double>(n));
        return std::abs(s) / static_cast<double>(W);
    };

    std::vector<cplx> bins = dft(series);
    std::vector<double> mag(static_cast<std::size_t>(W));
    for (i64 k = 0; k < W; ++k)
        mag[static_cast<std::size_t>(k)] = std::abs(bins[static_cast<std::size_t>(k)]) /
                                           static_cast<double>(W);

    std::vector<double> sorted = mag;
    std::nth_element(sorted.begin(), sorted.begin() + W / 2, sorted.end());
    const double median = sorted[static_cast<std::size_t>(W / 2)];
    const double cut = peak_factor * median;

    std::vector<SpectralAtom> found;
    for (i64 k = 0; k < W; ++k) {
        const double here = mag[static_cast<std::size_t>(k)];
        const double left = mag[static_cast<std::size_t>((k + W - 1) % W)];
        const double right = mag[static_cast<std::size_t>((k + 1) % W)];
        if (here <= cut || here < left || right > here) continue;

        // Refine: golden-section climb of the amplitude within one bin width.
        double lo = (static_cast<double>(k) - 1.0) / static_cast<double>(W);
        double hi = (static_cast<double>(k) + 1.0) / static_cast<double>(W);
        for (int it = 0; it < 64; ++it) {
            double a = lo + (hi - lo) / 3.0;
            double b = hi - (hi - lo) / 3.0;
            if (amplitude(a) < amplitude(b))
                lo = a;
            else
                hi = b;
        }
        double theta = 0.5 * (lo + hi);
        theta -= std::floor(theta);
        found.push_back({theta, amplitude(theta)});
    }

    std::sort(found.begin(), found.end(),
              [](const SpectralAtom& a, const SpectralAtom& b) { return a.weight > b.weight; });

    SpectralMeasure sm;
    const double dedup = 0.75 / static_cast<double>(W);
    for (const auto& atom : found) {
        bool dup = false;
        for (const auto& kept : sm.atoms) {
            double diff = std::fabs(atom.frequency - kept.frequency);
            diff = std::min(diff, 1.0 - diff);
            if (diff < dedup) dup = true;
        }
        if (!dup) sm.atoms.push_back(atom);
    }

    sm.total_mass = series[0].real();
    double atom_mass = 0.0;
    for (const auto& a : sm.atoms) atom_mass += a.weight;
    sm.continuous_part_mass = std::max(0.0, sm.total_mass - atom_mass);
    return sm;
}

}  // namespace ergo
