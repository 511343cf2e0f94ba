#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "ergo/common.hpp"

namespace ergo {

// All big sums in this library go through det_sum: terms are grouped into
// fixed-size leaf blocks (sequential accumulation inside a block), and block
// sums are merged pairwise in index order.  The reduction tree depends only on
// the term count, never on the thread count, so results are bit-identical for
// --threads 1 and --threads 64.
inline constexpr i64 kSumLeafSize = 1024;

template <typename T>
T tree_merge(std::vector<T>& v) {
    if (v.empty()) return T{};
    std::size_t m = v.size();
    while (m > 1) {
        std::size_t h = 0;
        for (std::size_t i = 0; i + 1 < m; i += 2) v[h++] = v[i] + v[i + 1];
        if (m & 1) v[h++] = v[m - 1];
        m = h;
    }
    return v[0];
}

template <typename T, typename F>
T det_sum(i64 n, F&& term, int threads = 1) {
    if (n <= 0) return T{};
    const i64 nblocks = (n + kSumLeafSize - 1) / kSumLeafSize;
    std::vector<T> partial(static_cast<std::size_t>(nblocks));
    auto run_block = [&](i64 b) {
        const i64 lo = b * kSumLeafSize;
        const i64 hi = std::min(n, lo + kSumLeafSize);
        T acc{};
        for (i64 i = lo; i < hi; ++i) acc = acc + term(i);
        partial[static_cast<std::size_t>(b)] = acc;
    };
    if (threads <= 1 || nblocks == 1) {
        for (i64 b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::atomic<i64> next{0};
        auto worker = [&] {
            for (;;) {
                i64 b = next.fetch_add(1);
                if (b >= nblocks) break;
                run_block(b);
            }
        };
        int nt = static_cast<int>(std::min<i64>(threads, nblocks));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return tree_merge(partial);
}

}  // namespace ergo
