// SPDX-License-Identifier: Apache-2.0
//! \file spinport/parallel.hpp
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spinport
{
/*!
 * Call fn(i) for i in [0, n) on up to `threads` workers.
 *
 * Indices are split into contiguous chunks. fn must only write to slots
 * owned by its index; the first exception thrown by any worker is rethrown.
 */
template<class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn)
{
    std::size_t const workers
        = std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
    if (workers == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            fn(i);
        }
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t const chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
    {
        std::size_t const begin = w * chunk;
        std::size_t const end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try
            {
                for (std::size_t i = begin; i < end; ++i)
                {
                    fn(i);
                }
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                {
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

}  // namespace spinport
