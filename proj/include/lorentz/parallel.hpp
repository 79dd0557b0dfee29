#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace lorentz
{
//! Items per work block. Fixed so results do not depend on thread count.
inline constexpr std::uint64_t default_block_size = 256;

//---------------------------------------------------------------------------//
/*!
 * Map-reduce over the index range [0, n) with schedule-independent results.
 *
 * The range is cut into fixed blocks; each block is accumulated into a
 * fresh copy of `init` by `body(begin, end, acc)`, and the block results are
 * merged in block order by `merge(total, block_acc)`. Floating-point sums
 * are therefore bit-identical for any number of threads. If blocks throw,
 * the exception of the lowest-numbered failing block is rethrown.
 */
template<class Acc, class Body, class Merge>
Acc parallel_reduce(std::uint64_t n,
                    unsigned threads,
                    Acc const& init,
                    Body&& body,
                    Merge&& merge,
                    std::uint64_t block_size = default_block_size)
{
    std::uint64_t const n_blocks = (n + block_size - 1) / block_size;
    std::vector<std::optional<Acc>> partial(n_blocks);
    std::vector<std::exception_ptr> errors(n_blocks);
    std::atomic<std::uint64_t> next{0};

    auto worker = [&] {
        for (std::uint64_t b = next++; b < n_blocks; b = next++)
        {
            try
            {
                Acc acc = init;
                std::uint64_t const begin = b * block_size;
                body(begin, std::min(n, begin + block_size), acc);
                partial[b] = std::move(acc);
            }
            catch (...)
            {
                errors[b] = std::current_exception();
            }
        }
    };

    unsigned const n_threads = static_cast<unsigned>(
        std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(n_blocks, 1)));
    if (n_threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    for (auto const& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }
    Acc total = init;
    for (auto& p : partial)
        merge(total, *p);
    return total;
}

}  // namespace lorentz
