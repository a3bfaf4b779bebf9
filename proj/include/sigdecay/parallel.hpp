#ifndef SIGDECAY_PARALLEL_HPP
#define SIGDECAY_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sigdecay {

inline int resolve_workers(int requested) {
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

/// Splits [0, n) into `workers` contiguous chunks and runs
/// fn(chunk_index, begin, end) on each. Chunk boundaries depend only on
/// (n, workers); callers that merge per-chunk results in chunk order get
/// worker-count-independent output as long as the merge is order-free
/// (the callers here merge integer counts or concatenate per-chunk rows
/// that are later sorted or indexed by absolute position).
inline void parallel_chunks(std::size_t n, int workers,
                            const std::function<void(int, std::size_t, std::size_t)> &fn) {
    workers = resolve_workers(workers);
    if (n == 0)
        return;
    if (std::size_t(workers) > n)
        workers = int(n);
    if (workers == 1) {
        fn(0, 0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = std::size_t(w) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        threads.emplace_back([&, w, begin, end] {
            try {
                fn(w, begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        });
    }
    for (auto &t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace sigdecay

#endif
