#include "rvml/common.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace rvml {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_budget(int n) { g_threads = std::max(1, n); }
int thread_budget() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1, thread_budget()), n);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

} // namespace rvml
