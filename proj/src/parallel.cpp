#include "ben/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ben {
namespace {

std::atomic<int> g_override{0};

int environment_limit() {
    static const int limit = [] {
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("BEN_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return std::min(v, static_cast<int>(hw));
        }
        return static_cast<int>(hw);
    }();
    return limit;
}

}  // namespace

int thread_limit() {
    const int o = g_override.load();
    return o > 0 ? o : environment_limit();
}

void set_thread_limit(int threads) { g_override.store(std::max(0, threads)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t min_block) {
    if (count == 0) return;
    const std::size_t max_threads = static_cast<std::size_t>(thread_limit());
    const std::size_t threads =
        std::min(max_threads, std::max<std::size_t>(1, count / std::max<std::size_t>(1, min_block)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t begin = count * t / threads;
            const std::size_t end = count * (t + 1) / threads;
            workers.emplace_back([&, t, begin, end] {
                for (std::size_t i = begin; i < end; ++i) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[t] = std::current_exception();
                        return;
                    }
                }
            });
        }
    }
    for (std::size_t t = 0; t < threads; ++t) {
        if (errors[t]) std::rethrow_exception(errors[t]);
    }
}

}  // namespace ben
