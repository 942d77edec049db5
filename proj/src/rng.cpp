#include "endow/rng.hpp"

namespace endow {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index)
    : CounterRng(seed, static_cast<std::uint64_t>(stream), index) {}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t k = mix64(seed + kGolden);
    k = mix64(k ^ (stream * 0xD1B54A32D192ED03ULL));
    k = mix64(k ^ (index + 0x8CB92BA72F3D8DD7ULL));
    key_ = k;
}

CounterRng::result_type CounterRng::operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

}  // namespace endow
