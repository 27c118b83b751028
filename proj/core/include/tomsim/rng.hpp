#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tomsim/types.hpp"

namespace tomsim {

// SplitMix64 stream. Chosen because its output is fully specified by the
// algorithm (no libstdc++/libc++ distribution differences), so seeded runs
// are byte-identical across platforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Unbiased integer in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);

    // Deterministic Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Stable per-record seed: mixes a base seed with a canonical tag string so
// that adding grid points to a suite never perturbs existing records.
Seed derive_seed(Seed base, std::string_view tag);

}  // namespace tomsim
