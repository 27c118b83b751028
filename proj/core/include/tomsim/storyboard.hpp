#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tomsim/errors.hpp"
#include "tomsim/types.hpp"

namespace tomsim {

// Directed location graph. Edges denote single-timestep reachability.
struct LocationGraph {
    std::vector<LocationId> vertices;
    std::vector<std::pair<LocationId, LocationId>> edges;
    LocationId start_vertex;

    bool has_vertex(const LocationId& v) const;
    bool has_edge(const LocationId& from, const LocationId& to) const;
    // Out-neighbors in vertex-list order (deterministic).
    std::vector<LocationId> neighbors(const LocationId& from) const;

    // Complete digraph (both directions, no self loops).
    static LocationGraph complete(std::vector<LocationId> vertices, LocationId start);

    bool operator==(const LocationGraph&) const = default;
};

// A pinned event: `character` performs the move action into `location` at
// exactly timestep t.
struct MoveAt {
    CharacterId character;
    LocationId location;
    int t = 0;

    bool operator==(const MoveAt&) const = default;
};

// All listed characters are located at `location` at the end of timestep t.
// The simulator realizes this by scheduling one arrival move per listed
// character into the free timesteps at and immediately before t.
struct CrossPaths {
    std::vector<CharacterId> characters;  // size >= 2, distinct
    LocationId location;
    int t = 0;

    bool operator==(const CrossPaths&) const = default;
};

// Randomly generated events inside [t_start, t_end] (inclusive) must not
// move any of the protected characters.
struct ExclusiveRandom {
    std::vector<CharacterId> protected_characters;
    int t_start = 0;
    int t_end = 0;

    bool operator==(const ExclusiveRandom&) const = default;
};

using EventSpec = std::variant<MoveAt, CrossPaths, ExclusiveRandom>;

struct Storyboard {
    std::vector<CharacterId> characters;
    std::vector<ActionId> actions;
    LocationGraph graph;
    std::vector<EventSpec> event_specs;
    int horizon = 0;
    EnvironmentTag environment = EnvironmentTag::hallways_doors;
    EntityKind entity_kind = EntityKind::animate;

    bool operator==(const Storyboard&) const = default;
};

// Bound question roles: S1 (observer), optional S2 (mediator), T (target).
struct RoleBinding {
    CharacterId s1;
    std::optional<CharacterId> s2;
    CharacterId target;

    bool operator==(const RoleBinding&) const = default;
};

// Parameters of the mislead-distance experiment family.
struct SuiteParams {
    int order = 1;                 // 1 or 2
    int mislead_distance = 0;      // d >= 0
    int num_characters = 8;
    int num_locations = 6;
    int horizon = 100;
};

// Builder bookkeeping; ground truth in datasets always comes from the
// epistemics oracle, never from these fields.
struct ExpectedLocations {
    LocationId first_common;
    LocationId believed;
    LocationId actual_final;
};

enum class BoardIssue {
    NO_CHARACTERS,
    DUPLICATE_CHARACTER,
    NONPOSITIVE_HORIZON,
    DUPLICATE_VERTEX,
    START_NOT_IN_GRAPH,
    EDGE_ENDPOINT_MISSING,
    SELF_LOOP_EDGE,
    UNREACHABLE_VERTEX,
    TIMESTEP_OUT_OF_RANGE,
    PINNED_CLASH,
    WINDOW_OUT_OF_RANGE,
    WINDOW_PIN_CONFLICT,
    UNKNOWN_CHARACTER,
    UNKNOWN_LOCATION,
    CROSS_PATHS_TOO_FEW,
    CROSS_PATHS_DUPLICATE,
};

const char* to_string(BoardIssue code);

struct ValidationIssue {
    BoardIssue code;
    std::string detail;
    int spec_index = -1;  // index into event_specs, or -1 for board-level issues
};

using ValidationReport = std::vector<ValidationIssue>;

// Carries a non-empty ValidationReport out of load_board.
class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

// Reports every invariant violation; never throws. Empty report == valid.
ValidationReport validate_storyboard(const Storyboard& sb);

// Location vocabulary per environment: index 0 is the start vertex
// (the_hallway / the_field / no_call), the rest are rooms, holes, or callees.
std::vector<LocationId> environment_vertices(EnvironmentTag env, int count);
std::vector<ActionId> environment_actions(EnvironmentTag env, EntityKind kind);

struct BuiltBoard {
    Storyboard board;
    RoleBinding roles;
    ExpectedLocations expected;
};

// Mislead-distance boards. Deterministic in (params, seed): the characters,
// role binding, and key locations are all drawn from `seed`.
//
// First order:   CrossPaths({S1,T}, L1, 10); MoveAt(T, L2, 11);
//                ExclusiveRandom({S1,T}, 12, 11+d); MoveAt(T, L3, 12+d);
//                ExclusiveRandom({S1,T}, 13+d, n).
// Second order:  CrossPaths({S1,S2,T}, L1, 10); MoveAt(T, L2, 11);
//                ExclusiveRandom({S1,S2,T}, 12, 10+d);
//                CrossPaths({S2,T}, L3, 12+d); MoveAt(T, L4, 13+d);
//                ExclusiveRandom({S1,S2,T}, 14+d, n).
// Empty windows are omitted. The second-order protection window ends at
// 10+d so the two arrivals realizing the second meeting (at 11+d and 12+d)
// never move a protected character inside a window.
BuiltBoard first_order_board(const SuiteParams& params, Seed seed,
                             EnvironmentTag env = EnvironmentTag::hallways_doors);
BuiltBoard second_order_board(const SuiteParams& params, Seed seed,
                              EnvironmentTag env = EnvironmentTag::hallways_doors);

struct SallyAnneBoard {
    Storyboard board;
    RoleBinding roles;
};

// Fully pinned 2-character, 3-location, 5-event false-belief board.
SallyAnneBoard sally_anne_board();

// Board file I/O (JSON, UTF-8). load_board throws ParseError on malformed
// input and ValidationError when the parsed board fails validation.
Storyboard load_board(const std::filesystem::path& path);
void save_board(const Storyboard& sb, const std::filesystem::path& path);
std::string board_to_json(const Storyboard& sb);
Storyboard board_from_json(const std::string& text);

}  // namespace tomsim
