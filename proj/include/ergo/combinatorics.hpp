#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ergo/common.hpp"

namespace ergo {

/// Finite window E subset of [0, N) represented as a bit vector.
struct IntegerWindowSet {
    i64 N = 0;
    std::vector<bool> members;  // size N

    i64 size() const {
        i64 s = 0;
        for (bool b : members) s += b ? 1 : 0;
        return s;
    }
    double density() const { return N > 0 ? static_cast<double>(size()) / static_cast<double>(N) : 0.0; }
    bool contains(i64 x) const {
        return x >= 0 && x < N && members[static_cast<std::size_t>(x)];
    }
    std::vector<i64> to_list() const {
        std::vector<i64> out;
        for (i64 x = 0; x < N; ++x)
            if (members[static_cast<std::size_t>(x)]) out.push_back(x);
        return out;
    }
};

IntegerWindowSet make_window_set(i64 N, const std::vector<i64>& members);
IntegerWindowSet full_window(i64 N);

/// Nontrivial k-term progression counts keyed by common difference d >= 1.
struct APCountReport {
    i64 k = 3;
    std::map<i64, i64> counts_by_difference;  // only differences with a positive count
    i64 total = 0;
};

/// Progression-free set in [0, L) built from sphere-level digit sets (greedy
/// scan below L = 64); the progression-free property is always re-verified by
/// a brute-force scan before returning.
IntegerWindowSet behrend_set(i64 L);

bool has_3ap(const IntegerWindowSet& E);
bool has_kap(const IntegerWindowSet& E, i64 k);

/// k = 3 uses word-parallel bit intersections; k >= 4 scans directly.
APCountReport count_aps_by_difference(const IntegerWindowSet& E, i64 k);

/// True iff some P(n) = a n^2 + b n + c with integer coefficients, (a, b) != (0, 0),
/// has P(0..4) all inside E with at least three distinct values.
bool has_qc5(const IntegerWindowSet& E);

/// |E cap (E+m_1) cap ... cap (E+m_k)| / N.
double shifted_intersection_density(const IntegerWindowSet& E, const std::vector<i64>& shifts);

/// Largest gap between consecutive members, counting the gaps to both window
/// edges; an empty set reports (N, false).
std::pair<i64, bool> syndetic_gap(const IntegerWindowSet& S);

struct GreenReport {
    i64 best_d = 0;      // difference with the most 3-term progressions (0 if none)
    i64 count = 0;       // progression count at best_d
    double threshold = 0.0;  // (1 - eps) * density^3 * N
    bool pass = false;   // count >= threshold
};

GreenReport green_count_check(const IntegerWindowSet& E, double eps);

}  // namespace ergo
