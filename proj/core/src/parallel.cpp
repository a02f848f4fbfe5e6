#include "gsvq/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace gsvq {

namespace {

int default_threads() {
    if (const char* env = std::getenv("GSVQ_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> g_cap{0}; // 0 = unset, use default

} // namespace

int max_threads() {
    const int cap = g_cap.load(std::memory_order_relaxed);
    return cap >= 1 ? cap : default_threads();
}

void set_max_threads(int n) {
    g_cap.store(n >= 1 ? n : 0, std::memory_order_relaxed);
}

void parallel_for_chunks(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t chunks = num_chunks(n, chunk_size);

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_threads()), chunks);

    auto run_range = [&](std::size_t chunk) {
        const std::size_t begin = chunk * chunk_size;
        const std::size_t end = std::min(begin + chunk_size, n);
        fn(chunk, begin, end);
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_range(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) return;
            run_range(c);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 0; i + 1 < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

} // namespace gsvq
