#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gqcc {

// Worker count, capped by the GQR_THREADS environment variable.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("GQR_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) n = static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return n;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Work is split into contiguous blocks; when several indices throw, the
/// exception from the smallest index is rethrown. Nested calls run inline.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t workers =
        detail::in_parallel_region ? 1 : std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        threads.emplace_back([&, w, begin, end] {
            detail::in_parallel_region = true;
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (std::size_t w = 0; w < workers; ++w)
        if (errors[w]) std::rethrow_exception(errors[w]);
}

}  // namespace gqcc
