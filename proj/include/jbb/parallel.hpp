// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_PARALLEL_HPP
#define JBB_PARALLEL_HPP

#include "jbb/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jbb
{

// 0 means "all available cores".
inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Calls body(i) for i in [0, n) on up to `threads` workers. The first exception thrown
// by any call is rethrown on the calling thread after all workers joined.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body &&body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&]() {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

// Ordered parallel map: out[i] = fn(i).
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn &&fn)
{
    std::vector<T> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

inline constexpr std::size_t kDrawsPerChunk = 256;

// Monte Carlo reduction over n_draws realizations. Draws are cut into fixed chunks and
// chunk c always uses root.substream(c); chunk accumulators are merged in chunk order.
// The result therefore depends on (root, n_draws) only, not on the worker count.
//
// body(Acc &acc, CounterRng &rng, std::size_t first_draw, std::size_t count)
template <class Acc, class Body>
Acc chunked_reduce(std::size_t n_draws, unsigned threads, const CounterRng &root, Body &&body)
{
    const std::size_t chunks = (n_draws + kDrawsPerChunk - 1) / kDrawsPerChunk;
    std::vector<Acc> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        CounterRng rng = root.substream(c);
        const std::size_t first = c * kDrawsPerChunk;
        const std::size_t count = std::min(kDrawsPerChunk, n_draws - first);
        body(partial[c], rng, first, count);
    });
    Acc total{};
    for (const Acc &p : partial)
        total.merge(p);
    return total;
}

} // namespace jbb

#endif
