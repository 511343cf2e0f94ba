#include "ergo/combinatorics.hpp"

#include <algorithm>
#include <cmath>

namespace ergo {

IntegerWindowSet make_window_set(i64 N, const std::vector<i64>& members) {
    if (N < 0) throw DomainError("window set: N must be nonnegative");
    IntegerWindowSet E;
    E.N = N;
    E.members.assign(static_cast<std::size_t>(N), false);
    for (i64 x : members) {
        if (x < 0 || x >= N) throw ShapeError("window set: member outside [0, N)");
        E.members[static_cast<std::size_t>(x)] = true;
    }
    return E;
}

IntegerWindowSet full_window(i64 N) {
    if (N < 0) throw DomainError("window set: N must be nonnegative");
    IntegerWindowSet E;
    E.N = N;
    E.members.assign(static_cast<std::size_t>(N), true);
    return E;
}

bool has_3ap(const IntegerWindowSet& E) {
    // Pair scan: a 3-term progression is a pair (x, z) of equal parity with
    // midpoint (x + z) / 2 also in the set.
    std::vector<i64> list = E.to_list();
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t j = i + 1; j < list.size(); ++j) {
            // list[i] < list[j], so the midpoint lies strictly between them and
            // any hit is a progression with difference >= 1.
            i64 s = list[i] + list[j];
            if ((s & 1) == 0 && E.contains(s / 2)) return true;
        }
    return false;
}

bool has_kap(const IntegerWindowSet& E, i64 k) {
    if (k < 2) throw DomainError("progression test: length must be at least 2");
    std::vector<i64> list = E.to_list();
    for (i64 a : list) {
        for (i64 d = 1; a + (k - 1) * d < E.N; ++d) {
            bool all = true;
            for (i64 j = 1; j < k && all; ++j) all = E.contains(a + j * d);
            if (all) return true;
        }
    }
    return false;
}

namespace {

std::vector<u64> pack_bits(const IntegerWindowSet& E) {
    std::size_t nwords = static_cast<std::size_t>((E.N + 63) / 64);
    std::vector<u64> w(nwords, 0);
    for (i64 x = 0; x < E.N; ++x)
        if (E.members[static_cast<std::size_t>(x)])
            w[static_cast<std::size_t>(x >> 6)] |= u64(1) << (x & 63);
    return w;
}

u64 shifted_word(const std::vector<u64>& w, i64 i, i64 s) {
    i64 q = s >> 6, r = s & 63;
    i64 n = static_cast<i64>(w.size());
    u64 lo = (i + q < n) ? w[static_cast<std::size_t>(i + q)] : 0;
    if (r == 0) return lo;
    u64 hi = (i + q + 1 < n) ? w[static_cast<std::size_t>(i + q + 1)] : 0;
    return (lo >> r) | (hi << (64 - r));
}

}  // namespace

APCountReport count_aps_by_difference(const IntegerWindowSet& E, i64 k) {
    if (k < 3) throw DomainError("progression count: length must be at least 3");
    APCountReport rep;
    rep.k = k;
    if (E.N == 0) return rep;
    if (k == 3) {
        // Word-parallel: count_d = popcount(E & (E >> d) & (E >> 2d)).
        std::vector<u64> w = pack_bits(E);
        const i64 nwords = static_cast<i64>(w.size());
        for (i64 d = 1; 2 * d <= E.N - 1; ++d) {
            i64 c = 0;
            for (i64 i = 0; i < nwords; ++i) {
                u64 x = w[static_cast<std::size_t>(i)] & shifted_word(w, i, d) &
                        shifted_word(w, i, 2 * d);
                c += __builtin_popcountll(x);
            }
            if (c > 0) {
                rep.counts_by_difference[d] = c;
                rep.total += c;
            }
        }
        return rep;
    }
    for (i64 d = 1; (k - 1) * d <= E.N - 1; ++d) {
        i64 c = 0;
        for (i64 a = 0; a + (k - 1) * d < E.N; ++a) {
            bool all = true;
            for (i64 j = 0; j < k && all; ++j) all = E.members[static_cast<std::size_t>(a + j * d)];
            c += all ? 1 : 0;
        }
        if (c > 0) {
            rep.counts_by_difference[d] = c;
            rep.total += c;
        }
    }
    return rep;
}

namespace {

// Greedy progression-free scan: admit x when it closes no 3-term progression
// with the members picked so far (x is always the largest element, so the
// only pattern to rule out is 2*mid - x already present).
IntegerWindowSet greedy_free_set(i64 L) {
    IntegerWindowSet E;
    E.N = L;
    E.members.assign(static_cast<std::size_t>(L), false);
    std::vector<i64> picked;
    for (i64 x = 0; x < L; ++x) {
        bool ok = true;
        for (i64 mid : picked) {
            i64 lo = 2 * mid - x;
            if (lo >= 0 && lo < x && E.members[static_cast<std::size_t>(lo)]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            E.members[static_cast<std::size_t>(x)] = true;
            picked.push_back(x);
        }
    }
    return E;
}

// Enumerate digit vectors x in [0, d)^n, most significant digit first, visiting
// only those whose base-(2d) value stays below L (prefix pruning: values grow
// with the digits in lexicographic order).
template <typename Visit>
void enum_digit_values(i64 pos, i64 d, i64 L, const std::vector<i64>& pw, i64 value, i64 radius,
                       Visit&& visit) {
    if (pos < 0) {
        visit(value, radius);
        return;
    }
    for (i64 x = 0; x < d; ++x) {
        i64 v = value + x * pw[static_cast<std::size_t>(pos)];
        if (v >= L) break;
        enum_digit_values(pos - 1, d, L, pw, v, radius + x * x, visit);
    }
}

}  // namespace

IntegerWindowSet behrend_set(i64 L) {
    if (L < 2) throw DomainError("progression-free set: window must have at least two points");
    if (L > (i64(1) << 22)) throw GuardError("progression-free set: window guard exceeded");

    std::vector<std::vector<i64>> candidates;

    if (L < 64) {
        candidates.push_back(greedy_free_set(L).to_list());
    } else {
        // Digit sets x = sum x_i (2d)^i with digits x_i in [0, d): adding two such
        // numbers never carries, and doubling a digit stays below the base, so a
        // progression x + z = 2y forces the digit equations x_i + z_i = 2 y_i.
        // On a fixed sphere sum x_i^2 = r the parallelogram identity then forces
        // x = z, so every sphere level set is progression-free; for d = 2 the
        // digit equations alone force x = z, so the whole box is progression-free.
        for (i64 n = 2; (i64(1) << (2 * (n - 1))) < L; ++n) {
            std::vector<i64> ds{2};
            i64 pinned = static_cast<i64>(std::floor(std::pow(static_cast<double>(L),
                                                              1.0 / static_cast<double>(n)) / 2.0));
            for (i64 d = std::max<i64>(2, pinned - 2); d <= pinned + 2; ++d)
                if (d > 2) ds.push_back(d);
            for (i64 d : ds) {
                const i64 base = 2 * d;
                // Need an n-digit number below L with a nonzero top digit;
                // otherwise this (n, d) repeats the (n-1)-digit scan.
                double top = std::pow(static_cast<double>(base), static_cast<double>(n - 1));
                if (top >= static_cast<double>(L)) continue;
                std::vector<i64> pw(static_cast<std::size_t>(n), 1);
                for (i64 i = 1; i < n; ++i)
                    pw[static_cast<std::size_t>(i)] = pw[static_cast<std::size_t>(i - 1)] * base;
                std::map<i64, std::vector<i64>> by_radius;
                enum_digit_values(n - 1, d, L, pw, 0, 0, [&](i64 value, i64 radius) {
                    by_radius[radius].push_back(value);
                });
                std::size_t best = 0;
                const std::vector<i64>* best_vals = nullptr;
                for (const auto& [r, vals] : by_radius)
                    if (vals.size() > best) {
                        best = vals.size();
                        best_vals = &vals;
                    }
                if (best_vals) candidates.push_back(*best_vals);
                if (d == 2) {
                    std::vector<i64> box;
                    for (const auto& [r, vals] : by_radius)
                        box.insert(box.end(), vals.begin(), vals.end());
                    candidates.push_back(std::move(box));
                }
            }
        }
    }

    candidates.push_back({0, 1});  // always-valid floor so the result is never empty

    IntegerWindowSet best = make_window_set(L, {});
    i64 best_size = -1;
    for (const auto& cand : candidates) {
        IntegerWindowSet E = make_window_set(L, cand);
        i64 sz = E.size();
        if (sz <= best_size) continue;
        if (has_3ap(E)) continue;  // construction re-verified, never trusted
        best = std::move(E);
        best_size = sz;
    }
    return best;
}

bool has_qc5(const IntegerWindowSet& E) {
    std::vector<i64> list = E.to_list();
    const i64 m = static_cast<i64>(list.size());
    if (m * m * m > (i64(1) << 30)) throw GuardError("quadratic configuration: population guard exceeded");
    // P is determined by its first three values: P(3) and P(4) follow from the
    // vanishing third difference, and a = (P(2) - 2 P(1) + P(0)) / 2 must be an
    // integer, i.e. P(0) + P(2) must be even.
    for (i64 e0 : list)
        for (i64 e2 : list) {
            if (((e0 + e2) & 1) != 0) continue;
            for (i64 e1 : list) {
                if (e0 == e1 && e1 == e2) continue;  // constant polynomial, (a,b) = (0,0)
                i64 p3 = e0 - 3 * e1 + 3 * e2;
                if (!E.contains(p3)) continue;
                i64 p4 = e1 - 3 * e2 + 3 * p3;
                if (!E.contains(p4)) continue;
                i64 vals[5] = {e0, e1, e2, p3, p4};
                int distinct = 0;
                for (int i = 0; i < 5; ++i) {
                    bool seen = false;
                    for (int j = 0; j < i; ++j) seen = seen || vals[j] == vals[i];
                    distinct += seen ? 0 : 1;
                }
                if (distinct >= 3) return true;
            }
        }
    return false;
}

double shifted_intersection_density(const IntegerWindowSet& E, const std::vector<i64>& shifts) {
    for (i64 m : shifts)
        if (m <= -E.N || m >= E.N) throw DomainError("shifted intersection: shift outside window");
    if (E.N == 0) return 0.0;
    i64 c = 0;
    for (i64 x = 0; x < E.N; ++x) {
        if (!E.members[static_cast<std::size_t>(x)]) continue;
        bool all = true;
        for (i64 mshift : shifts)
            if (!E.contains(x - mshift)) {
                all = false;
                break;
            }
        c += all ? 1 : 0;
    }
    return static_cast<double>(c) / static_cast<double>(E.N);
}

std::pair<i64, bool> syndetic_gap(const IntegerWindowSet& S) {
    std::vector<i64> list = S.to_list();
    if (list.empty()) return {S.N, false};
    i64 gap = list.front();  // gap from the window start
    for (std::size_t i = 1; i < list.size(); ++i) gap = std::max(gap, list[i] - list[i - 1]);
    gap = std::max(gap, (S.N - 1) - list.back());  // gap to the window end
    return {gap, true};
}

GreenReport green_count_check(const IntegerWindowSet& E, double eps) {
    const i64 sz = E.size();
    if (E.N == 0 || sz == 0) throw DomainError("progression threshold check: set must be nonempty");
    const double delta = static_cast<double>(sz) / static_cast<double>(E.N);
    GreenReport rep;
    rep.threshold = (1.0 - eps) * delta * delta * delta * static_cast<double>(E.N);
    APCountReport counts = count_aps_by_difference(E, 3);
    for (const auto& [d, c] : counts.counts_by_difference)
        if (c > rep.count) {
            rep.count = c;
            rep.best_d = d;
        }
    rep.pass = static_cast<double>(rep.count) >= rep.threshold;
    return rep;
}

}  // namespace ergo
