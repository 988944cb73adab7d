#pragma once
#include <cstdint>
#include <random>

namespace stm {

// Cross-platform deterministic uniform in [0,1): distribution objects are
// implementation-defined, the raw mt19937_64 stream is not.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * (1.0 / 9007199254740992.0);
}

} // namespace stm
