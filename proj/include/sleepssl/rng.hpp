#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sleepssl {

// All randomness in a run flows from a single root seed. Substreams are
// derived by hashing (seed, name, index) so that data generation,
// augmentation, weight init and subsampling can be reproduced independently.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                 std::uint64_t index = 0) {
    // FNV-1a over the stream name, then splitmix64 finalization.
    std::uint64_t h = 14695981039346656037ull;
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = root + 0x9e3779b97f4a7c15ull * (h ^ (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view stream,
                    std::uint64_t index = 0) {
    return Rng(derive_seed(root, stream, index));
}

}  // namespace sleepssl
