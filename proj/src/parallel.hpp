#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ahy {

/// Worker count: hardware concurrency capped by the AHY_THREADS environment variable.
inline unsigned threadCount() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AHY_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Runs f(i) for i in [0, count) on a static partition. f must only touch slot i of shared outputs.
template <class F>
void parallelFor(std::size_t count, F&& f) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threadCount(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) f(i);
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace ahy
