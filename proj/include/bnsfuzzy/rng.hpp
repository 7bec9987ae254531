#pragma once

#include <cstdint>
#include <random>

namespace bnsfuzzy {

using Engine = std::mt19937_64;

/// Independent random substreams owned by one simulated path or one model.
enum class Stream : std::uint32_t {
    brownian = 1,
    subordinator = 2,
    secondary_subordinator = 3,  // Z^(b) in the refined model, Z* in the generalized one
    init = 4,
    shuffle = 5,
    bootstrap = 6,
    features = 7,
};

/// Seed of path (or tree) `index` derived from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return base ^ index;
}

/// Engine for one substream; streams with distinct ids never share state.
inline Engine make_engine(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Engine{seq};
}

}  // namespace bnsfuzzy
