#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace isokin {

//! Worker count: explicit value, else ISOKIN_THREADS, else hardware
unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

//---------------------------------------------------------------------------//
/*!
 * Run body(i) for i in [0, n) on a pool of workers.
 *
 * Work items must write only to their own slot; callers merge in index order
 * so results do not depend on the worker count. If several items throw, the
 * exception of the lowest index is rethrown.
 */
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body)
{
    if (threads <= 1 || n <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    std::size_t err_index = n;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (i < err_index)
                {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };
    unsigned nworkers = static_cast<unsigned>(
        std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (unsigned w = 0; w < nworkers; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

}  // namespace isokin
