#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace isoedf {

/// Worker count from ISO_EDF_THREADS (0 or unset = hardware concurrency).
inline unsigned workers_from_env()
{
    unsigned requested = 0;
    if (char const* env = std::getenv("ISO_EDF_THREADS")) {
        try {
            requested = static_cast<unsigned>(std::stoul(env));
        } catch (std::exception const&) {
            requested = 0;
        }
    }
    if (requested == 0) {
        requested = std::max(1u, std::thread::hardware_concurrency());
    }
    return requested;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The lowest-index exception wins.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = count;

    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace isoedf
