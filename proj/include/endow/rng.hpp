#pragma once

#include <cstdint>
#include <limits>

namespace endow {

/// Stream tags; each purpose draws from its own keyed stream so that adding
/// draws for one component leaves the others untouched.
enum class Stream : std::uint64_t {
    Brownian = 1,
    Chain = 2,
    DeathClock = 3,
    Particles = 4,
    NestedBond = 5,
    Scenario = 6,
};

/// Counter-based generator: output n is a bijective mix of (key + n * golden).
/// The key is derived from (seed, stream, index), so any path's draws can be
/// reproduced without touching other paths. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index);
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace endow
