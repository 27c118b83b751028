#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tomsim/rng.hpp"

namespace tomsim {

// Bundled entity name pools. Animate names are capitalized first names;
// inanimate names are lowercase household objects. The pools are disjoint.
const std::vector<std::string>& animate_name_pool();
const std::vector<std::string>& inanimate_name_pool();

// Draws `count` distinct names without replacement. Throws InvalidParams
// when count exceeds the pool size.
std::vector<std::string> sample_names(const std::vector<std::string>& pool,
                                      std::size_t count, SplitMix64& rng);

}  // namespace tomsim
