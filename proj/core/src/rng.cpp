#include "tomsim/rng.hpp"

#include "tomsim/errors.hpp"

namespace tomsim {

std::uint64_t SplitMix64::next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    if (bound == 0) {
        throw InvalidParams("SplitMix64::below requires bound > 0");
    }
    // Lemire multiply-shift with rejection for exact uniformity.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::size_t> SplitMix64::sample_indices(std::size_t n, std::size_t k) {
    if (k > n) {
        throw InvalidParams("sample_indices: k exceeds population size");
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // Partial Fisher-Yates: the first k slots are the sample.
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        hash ^= static_cast<std::uint64_t>(b);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

Seed derive_seed(Seed base, std::string_view tag) {
    SplitMix64 mixer(fnv1a64(tag) ^ (base * 0x9E3779B97F4A7C15ull));
    return mixer.next_u64();
}

}  // namespace tomsim
