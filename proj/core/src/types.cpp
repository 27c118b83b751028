#include "tomsim/types.hpp"

#include "tomsim/errors.hpp"

namespace tomsim {

const char* to_string(EnvironmentTag env) {
    switch (env) {
        case EnvironmentTag::hallways_doors: return "hallways_doors";
        case EnvironmentTag::holes_field: return "holes_field";
        case EnvironmentTag::conference_call: return "conference_call";
    }
    return "hallways_doors";
}

const char* to_string(EntityKind kind) {
    return kind == EntityKind::animate ? "animate" : "inanimate";
}

EnvironmentTag environment_from_string(const std::string& s) {
    if (s == "hallways_doors") return EnvironmentTag::hallways_doors;
    if (s == "holes_field") return EnvironmentTag::holes_field;
    if (s == "conference_call") return EnvironmentTag::conference_call;
    throw ParseError("unknown environment tag '" + s + "'", "field: environment");
}

EntityKind entity_kind_from_string(const std::string& s) {
    if (s == "animate") return EntityKind::animate;
    if (s == "inanimate") return EntityKind::inanimate;
    throw ParseError("unknown entity kind '" + s + "'", "field: entity_kind");
}

}  // namespace tomsim
