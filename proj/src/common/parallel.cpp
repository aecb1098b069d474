// SPDX-License-Identifier: Apache-2.0
#include "neubtf/common/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace neubtf {

namespace {
std::atomic<int> g_override{0};
}

int worker_count() {
    if (const int o = g_override.load(); o > 0) return o;
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NEUBTF_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0) n = cap;
        } catch (const std::exception&) {
            // ignored: a malformed value leaves the hardware default
        }
    }
    return std::max(n, 1);
}

void set_worker_override(int workers) { g_override.store(std::max(workers, 0)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace neubtf
