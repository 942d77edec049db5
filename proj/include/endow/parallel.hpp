#pragma once

#include <cstddef>
#include <functional>

namespace endow {

/// Paths are processed in fixed-size chunks. Chunk boundaries do not depend on
/// the worker count, so per-chunk partial sums reduced in chunk order give the
/// same bits for any number of threads.
inline constexpr std::size_t kChunkSize = 4096;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kChunkSize) {
    return (n + chunk - 1) / chunk;
}

/// Calls body(chunk_index, begin, end) for every chunk of [0, n).
void for_each_chunk(std::size_t n, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                    std::size_t chunk = kChunkSize);

}  // namespace endow
