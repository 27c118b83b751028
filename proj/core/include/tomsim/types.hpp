#pragma once

#include <cstdint>
#include <string>

namespace tomsim {

using CharacterId = std::string;
using LocationId = std::string;
using ActionId = std::string;
using Seed = std::uint64_t;

// Story settings. Each environment fixes the location naming scheme, the
// action vocabulary, and the sentence templates used by the renderer.
enum class EnvironmentTag {
    hallways_doors,
    holes_field,
    conference_call,
};

enum class EntityKind {
    animate,
    inanimate,
};

const char* to_string(EnvironmentTag env);
const char* to_string(EntityKind kind);

// Throw ParseError on unrecognized tags.
EnvironmentTag environment_from_string(const std::string& s);
EntityKind entity_kind_from_string(const std::string& s);

}  // namespace tomsim
