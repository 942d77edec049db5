#include "endow/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace endow {

void for_each_chunk(std::size_t n, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                    std::size_t chunk) {
    const std::size_t n_chunks = chunk_count(n, chunk);
    if (n_chunks == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n_chunks);

    auto run = [&](std::size_t w) {
        for (std::size_t c = w; c < n_chunks; c += workers) {
            const std::size_t begin = c * chunk;
            body(c, begin, std::min(n, begin + chunk));
        }
    };
    if (workers == 1) {
        run(0);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                run(w);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace endow
