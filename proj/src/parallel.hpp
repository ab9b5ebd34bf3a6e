// SPDX-License-Identifier: Apache-2.0
// Static chunked parallel loop. Chunk boundaries depend only on n and the
// chunk count, never on scheduling.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ssrelay::detail {

inline unsigned effective_threads(unsigned requested, std::size_t work) {
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(requested, std::max<std::size_t>(work, 1)));
}

// fn(chunk, begin, end) is called once per chunk; chunk < n_chunks.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned n_chunks, Fn&& fn) {
    if (n_chunks <= 1) {
        fn(0u, std::size_t{0}, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(n_chunks);
    for (unsigned c = 0; c < n_chunks; ++c) {
        const std::size_t begin = n * c / n_chunks;
        const std::size_t end = n * (c + 1) / n_chunks;
        workers.emplace_back([&, c, begin, end] {
            try {
                fn(c, begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ssrelay::detail
