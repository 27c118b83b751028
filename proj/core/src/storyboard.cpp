#include "tomsim/storyboard.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tomsim/names.hpp"
#include "tomsim/rng.hpp"

namespace tomsim {

using ordered_json = nlohmann::ordered_json;

bool LocationGraph::has_vertex(const LocationId& v) const {
    return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
}

bool LocationGraph::has_edge(const LocationId& from, const LocationId& to) const {
    return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
}

std::vector<LocationId> LocationGraph::neighbors(const LocationId& from) const {
    std::vector<LocationId> out;
    for (const auto& v : vertices) {
        if (v != from && has_edge(from, v)) out.push_back(v);
    }
    return out;
}

LocationGraph LocationGraph::complete(std::vector<LocationId> vertices, LocationId start) {
    LocationGraph g;
    g.vertices = std::move(vertices);
    g.start_vertex = std::move(start);
    for (const auto& a : g.vertices) {
        for (const auto& b : g.vertices) {
            if (a != b) g.edges.emplace_back(a, b);
        }
    }
    return g;
}

const char* to_string(BoardIssue code) {
    switch (code) {
        case BoardIssue::NO_CHARACTERS: return "NO_CHARACTERS";
        case BoardIssue::DUPLICATE_CHARACTER: return "DUPLICATE_CHARACTER";
        case BoardIssue::NONPOSITIVE_HORIZON: return "NONPOSITIVE_HORIZON";
        case BoardIssue::DUPLICATE_VERTEX: return "DUPLICATE_VERTEX";
        case BoardIssue::START_NOT_IN_GRAPH: return "START_NOT_IN_GRAPH";
        case BoardIssue::EDGE_ENDPOINT_MISSING: return "EDGE_ENDPOINT_MISSING";
        case BoardIssue::SELF_LOOP_EDGE: return "SELF_LOOP_EDGE";
        case BoardIssue::UNREACHABLE_VERTEX: return "UNREACHABLE_VERTEX";
        case BoardIssue::TIMESTEP_OUT_OF_RANGE: return "TIMESTEP_OUT_OF_RANGE";
        case BoardIssue::PINNED_CLASH: return "PINNED_CLASH";
        case BoardIssue::WINDOW_OUT_OF_RANGE: return "WINDOW_OUT_OF_RANGE";
        case BoardIssue::WINDOW_PIN_CONFLICT: return "WINDOW_PIN_CONFLICT";
        case BoardIssue::UNKNOWN_CHARACTER: return "UNKNOWN_CHARACTER";
        case BoardIssue::UNKNOWN_LOCATION: return "UNKNOWN_LOCATION";
        case BoardIssue::CROSS_PATHS_TOO_FEW: return "CROSS_PATHS_TOO_FEW";
        case BoardIssue::CROSS_PATHS_DUPLICATE: return "CROSS_PATHS_DUPLICATE";
    }
    return "UNKNOWN_ISSUE";
}

namespace {

std::string format_report(const ValidationReport& report) {
    std::ostringstream os;
    os << "storyboard failed validation:";
    for (const auto& issue : report) {
        os << " [" << to_string(issue.code);
        if (issue.spec_index >= 0) os << " @spec " << issue.spec_index;
        os << ": " << issue.detail << "]";
    }
    return os.str();
}

}  // namespace

ValidationError::ValidationError(ValidationReport report)
    : Error(format_report(report)), report_(std::move(report)) {}

ValidationReport validate_storyboard(const Storyboard& sb) {
    ValidationReport report;
    auto add = [&](BoardIssue code, std::string detail, int spec_index = -1) {
        report.push_back({code, std::move(detail), spec_index});
    };

    if (sb.characters.empty()) {
        add(BoardIssue::NO_CHARACTERS, "storyboard has no characters");
    }
    {
        std::set<CharacterId> seen;
        for (const auto& c : sb.characters) {
            if (!seen.insert(c).second) {
                add(BoardIssue::DUPLICATE_CHARACTER, "character '" + c + "' listed twice");
            }
        }
    }
    if (sb.horizon < 1) {
        add(BoardIssue::NONPOSITIVE_HORIZON, "horizon is " + std::to_string(sb.horizon));
    }

    const auto& g = sb.graph;
    {
        std::set<LocationId> seen;
        for (const auto& v : g.vertices) {
            if (!seen.insert(v).second) {
                add(BoardIssue::DUPLICATE_VERTEX, "vertex '" + v + "' listed twice");
            }
        }
    }
    if (!g.has_vertex(g.start_vertex)) {
        add(BoardIssue::START_NOT_IN_GRAPH, "start vertex '" + g.start_vertex + "'");
    }
    for (const auto& [from, to] : g.edges) {
        if (from == to) {
            add(BoardIssue::SELF_LOOP_EDGE, "self loop at '" + from + "'");
        }
        if (!g.has_vertex(from) || !g.has_vertex(to)) {
            add(BoardIssue::EDGE_ENDPOINT_MISSING, "edge " + from + " -> " + to);
        }
    }
    if (g.has_vertex(g.start_vertex)) {
        // BFS reachability from the start vertex.
        std::set<LocationId> reached{g.start_vertex};
        std::vector<LocationId> frontier{g.start_vertex};
        while (!frontier.empty()) {
            std::vector<LocationId> next;
            for (const auto& v : frontier) {
                for (const auto& [from, to] : g.edges) {
                    if (from == v && reached.insert(to).second) next.push_back(to);
                }
            }
            frontier = std::move(next);
        }
        for (const auto& v : g.vertices) {
            if (!reached.count(v)) {
                add(BoardIssue::UNREACHABLE_VERTEX, "vertex '" + v + "' unreachable from start");
            }
        }
    }

    auto known_char = [&](const CharacterId& c) {
        return std::find(sb.characters.begin(), sb.characters.end(), c) != sb.characters.end();
    };

    // Pinned timesteps (MoveAt times and CrossPaths fire times) must be
    // pairwise disjoint.
    std::map<int, int> pinned;  // t -> spec index
    for (std::size_t i = 0; i < sb.event_specs.size(); ++i) {
        const int idx = static_cast<int>(i);
        const auto& spec = sb.event_specs[i];
        if (const auto* m = std::get_if<MoveAt>(&spec)) {
            if (m->t < 1 || m->t > sb.horizon) {
                add(BoardIssue::TIMESTEP_OUT_OF_RANGE,
                    "move_at t=" + std::to_string(m->t), idx);
            } else if (auto [it, inserted] = pinned.emplace(m->t, idx); !inserted) {
                add(BoardIssue::PINNED_CLASH,
                    "t=" + std::to_string(m->t) + " also pinned by spec " +
                        std::to_string(it->second), idx);
            }
            if (!known_char(m->character)) {
                add(BoardIssue::UNKNOWN_CHARACTER, "'" + m->character + "'", idx);
            }
            if (!g.has_vertex(m->location)) {
                add(BoardIssue::UNKNOWN_LOCATION, "'" + m->location + "'", idx);
            }
        } else if (const auto* x = std::get_if<CrossPaths>(&spec)) {
            if (x->t < 1 || x->t > sb.horizon) {
                add(BoardIssue::TIMESTEP_OUT_OF_RANGE,
                    "cross_paths t=" + std::to_string(x->t), idx);
            } else if (auto [it, inserted] = pinned.emplace(x->t, idx); !inserted) {
                add(BoardIssue::PINNED_CLASH,
                    "t=" + std::to_string(x->t) + " also pinned by spec " +
                        std::to_string(it->second), idx);
            }
            if (x->characters.size() < 2) {
                add(BoardIssue::CROSS_PATHS_TOO_FEW,
                    std::to_string(x->characters.size()) + " characters listed", idx);
            }
            std::set<CharacterId> seen;
            for (const auto& c : x->characters) {
                if (!seen.insert(c).second) {
                    add(BoardIssue::CROSS_PATHS_DUPLICATE, "'" + c + "' listed twice", idx);
                }
                if (!known_char(c)) {
                    add(BoardIssue::UNKNOWN_CHARACTER, "'" + c + "'", idx);
                }
            }
            if (!g.has_vertex(x->location)) {
                add(BoardIssue::UNKNOWN_LOCATION, "'" + x->location + "'", idx);
            }
        } else if (const auto* w = std::get_if<ExclusiveRandom>(&spec)) {
            if (w->t_start < 1 || w->t_start > w->t_end || w->t_end > sb.horizon) {
                add(BoardIssue::WINDOW_OUT_OF_RANGE,
                    "[" + std::to_string(w->t_start) + ", " + std::to_string(w->t_end) + "]",
                    idx);
            }
            for (const auto& c : w->protected_characters) {
                if (!known_char(c)) {
                    add(BoardIssue::UNKNOWN_CHARACTER, "'" + c + "'", idx);
                }
            }
        }
    }

    // A window contradicts a pinned spec when realizing the pin would have
    // to move a protected character inside the window.
    for (std::size_t i = 0; i < sb.event_specs.size(); ++i) {
        const auto* w = std::get_if<ExclusiveRandom>(&sb.event_specs[i]);
        if (w == nullptr) continue;
        auto covers = [&](int t) { return t >= w->t_start && t <= w->t_end; };
        auto is_protected = [&](const CharacterId& c) {
            return std::find(w->protected_characters.begin(), w->protected_characters.end(),
                             c) != w->protected_characters.end();
        };
        for (std::size_t j = 0; j < sb.event_specs.size(); ++j) {
            if (const auto* m = std::get_if<MoveAt>(&sb.event_specs[j])) {
                if (covers(m->t) && is_protected(m->character)) {
                    add(BoardIssue::WINDOW_PIN_CONFLICT,
                        "move_at spec " + std::to_string(j) + " moves protected '" +
                            m->character + "' at t=" + std::to_string(m->t),
                        static_cast<int>(i));
                }
            } else if (const auto* x = std::get_if<CrossPaths>(&sb.event_specs[j])) {
                if (!covers(x->t)) continue;
                for (const auto& c : x->characters) {
                    if (is_protected(c)) {
                        add(BoardIssue::WINDOW_PIN_CONFLICT,
                            "cross_paths spec " + std::to_string(j) + " fires on protected '" +
                                c + "' at t=" + std::to_string(x->t),
                            static_cast<int>(i));
                    }
                }
            }
        }
    }

    return report;
}

std::vector<LocationId> environment_vertices(EnvironmentTag env, int count) {
    if (count < 2) {
        throw InvalidParams("an environment needs at least 2 locations");
    }
    std::vector<LocationId> out;
    switch (env) {
        case EnvironmentTag::hallways_doors:
            out.push_back("the_hallway");
            for (int i = 1; i < count; ++i) out.push_back("room_" + std::to_string(i));
            break;
        case EnvironmentTag::holes_field:
            out.push_back("the_field");
            for (int i = 1; i < count; ++i) out.push_back("hole_" + std::to_string(i));
            break;
        case EnvironmentTag::conference_call: {
            static const std::vector<LocationId> callees = {
                "city_hall",      "bank",       "doctors_office", "school",
                "library",        "post_office","police_station", "pharmacy",
                "museum",         "airport",    "hotel",          "courthouse",
                "fire_station",   "hospital",   "theater",        "bakery",
                "train_station",  "university", "embassy",        "gym",
            };
            if (count - 1 > static_cast<int>(callees.size())) {
                throw InvalidParams("conference_call supports at most " +
                                    std::to_string(callees.size() + 1) + " locations");
            }
            out.push_back("no_call");
            out.insert(out.end(), callees.begin(), callees.begin() + (count - 1));
            break;
        }
    }
    return out;
}

std::vector<ActionId> environment_actions(EnvironmentTag env, EntityKind kind) {
    if (kind == EntityKind::inanimate) return {"is_moved"};
    switch (env) {
        case EnvironmentTag::hallways_doors: return {"enters"};
        case EnvironmentTag::holes_field: return {"jump_in", "jump_out"};
        case EnvironmentTag::conference_call: return {"joins", "hangs_up"};
    }
    return {"enters"};
}

namespace {

// Shared builder plumbing. RNG consumption order, in sequence:
// (1) character names, (2) role indices, (3) key locations.
struct BuilderDraw {
    std::vector<CharacterId> characters;
    std::vector<CharacterId> roles;      // [S1, (S2,) T]
    std::vector<LocationId> vertices;
    std::vector<LocationId> key_locations;
};

BuilderDraw draw_cast(const SuiteParams& params, Seed seed, EnvironmentTag env,
                      int num_roles, int num_keys) {
    BuilderDraw out;
    SplitMix64 rng(seed);
    out.characters = sample_names(animate_name_pool(),
                                  static_cast<std::size_t>(params.num_characters), rng);
    for (std::size_t idx :
         rng.sample_indices(out.characters.size(), static_cast<std::size_t>(num_roles))) {
        out.roles.push_back(out.characters[idx]);
    }
    out.vertices = environment_vertices(env, params.num_locations);
    // Key locations are drawn from the non-start vertices: every character
    // begins at the start vertex, so a meeting pinned there would not be a
    // new co-location and the first-common-location distractor would break.
    for (std::size_t idx :
         rng.sample_indices(out.vertices.size() - 1, static_cast<std::size_t>(num_keys))) {
        out.key_locations.push_back(out.vertices[idx + 1]);
    }
    return out;
}

Storyboard make_board(const BuilderDraw& draw, const SuiteParams& params,
                      EnvironmentTag env, std::vector<EventSpec> specs) {
    Storyboard sb;
    sb.characters = draw.characters;
    sb.actions = environment_actions(env, EntityKind::animate);
    sb.graph = LocationGraph::complete(draw.vertices, draw.vertices.front());
    sb.event_specs = std::move(specs);
    sb.horizon = params.horizon;
    sb.environment = env;
    sb.entity_kind = EntityKind::animate;
    return sb;
}

}  // namespace

BuiltBoard first_order_board(const SuiteParams& params, Seed seed, EnvironmentTag env) {
    if (params.order != 1) {
        throw InvalidParams("first_order_board requires order=1");
    }
    if (params.mislead_distance < 0) {
        throw InvalidParams("mislead distance must be >= 0");
    }
    if (params.num_characters < 2) {
        throw InvalidParams("first-order pattern needs at least 2 characters");
    }
    if (params.num_locations < 4) {
        throw InvalidParams("first-order pattern needs at least 4 locations");
    }
    const int d = params.mislead_distance;
    const int n = params.horizon;
    if (12 + d > n) {
        throw InvalidParams("pattern does not fit: 12 + " + std::to_string(d) + " > " +
                            std::to_string(n));
    }

    BuilderDraw draw = draw_cast(params, seed, env, /*num_roles=*/2, /*num_keys=*/3);
    const CharacterId s1 = draw.roles[0];
    const CharacterId target = draw.roles[1];
    const LocationId l1 = draw.key_locations[0];
    const LocationId l2 = draw.key_locations[1];
    const LocationId l3 = draw.key_locations[2];

    std::vector<EventSpec> specs;
    specs.push_back(CrossPaths{{s1, target}, l1, 10});
    specs.push_back(MoveAt{target, l2, 11});
    if (d >= 1) {
        specs.push_back(ExclusiveRandom{{s1, target}, 12, 11 + d});
    }
    specs.push_back(MoveAt{target, l3, 12 + d});
    if (13 + d <= n) {
        specs.push_back(ExclusiveRandom{{s1, target}, 13 + d, n});
    }

    BuiltBoard out;
    out.board = make_board(draw, params, env, std::move(specs));
    out.roles = RoleBinding{s1, std::nullopt, target};
    out.expected = ExpectedLocations{l1, l2, l3};
    return out;
}

BuiltBoard second_order_board(const SuiteParams& params, Seed seed, EnvironmentTag env) {
    if (params.order != 2) {
        throw InvalidParams("second_order_board requires order=2");
    }
    if (params.mislead_distance < 0) {
        throw InvalidParams("mislead distance must be >= 0");
    }
    if (params.num_characters < 3) {
        throw InvalidParams("second-order pattern needs at least 3 characters");
    }
    if (params.num_locations < 5) {
        throw InvalidParams("second-order pattern needs at least 5 locations");
    }
    const int d = params.mislead_distance;
    const int n = params.horizon;
    if (13 + d > n) {
        throw InvalidParams("pattern does not fit: 13 + " + std::to_string(d) + " > " +
                            std::to_string(n));
    }

    BuilderDraw draw = draw_cast(params, seed, env, /*num_roles=*/3, /*num_keys=*/4);
    const CharacterId s1 = draw.roles[0];
    const CharacterId s2 = draw.roles[1];
    const CharacterId target = draw.roles[2];
    const LocationId l1 = draw.key_locations[0];
    const LocationId l2 = draw.key_locations[1];
    const LocationId l3 = draw.key_locations[2];
    const LocationId l4 = draw.key_locations[3];

    std::vector<EventSpec> specs;
    specs.push_back(CrossPaths{{s1, s2, target}, l1, 10});
    specs.push_back(MoveAt{target, l2, 11});
    if (d >= 2) {
        specs.push_back(ExclusiveRandom{{s1, s2, target}, 12, 10 + d});
    }
    specs.push_back(CrossPaths{{s2, target}, l3, 12 + d});
    specs.push_back(MoveAt{target, l4, 13 + d});
    if (14 + d <= n) {
        specs.push_back(ExclusiveRandom{{s1, s2, target}, 14 + d, n});
    }

    BuiltBoard out;
    out.board = make_board(draw, params, env, std::move(specs));
    out.roles = RoleBinding{s1, s2, target};
    out.expected = ExpectedLocations{l1, l2, l4};
    return out;
}

SallyAnneBoard sally_anne_board() {
    Storyboard sb;
    sb.characters = {"Sally", "Anne"};
    sb.actions = {"enters"};
    sb.graph = LocationGraph::complete({"the_hallway", "room_1", "room_2"}, "the_hallway");
    // Anne and Sally meet in room_1, Anne relocates to room_2 while Sally
    // watches, Sally leaves, and Anne slips back to room_1 unseen.
    sb.event_specs = {
        MoveAt{"Anne", "room_1", 1},
        MoveAt{"Sally", "room_1", 2},
        MoveAt{"Anne", "room_2", 3},
        MoveAt{"Sally", "the_hallway", 4},
        MoveAt{"Anne", "room_1", 5},
    };
    sb.horizon = 5;
    sb.environment = EnvironmentTag::hallways_doors;
    sb.entity_kind = EntityKind::animate;
    return SallyAnneBoard{std::move(sb), RoleBinding{"Sally", std::nullopt, "Anne"}};
}

namespace {

ordered_json spec_to_json(const EventSpec& spec) {
    ordered_json j;
    if (const auto* m = std::get_if<MoveAt>(&spec)) {
        j["type"] = "move_at";
        j["character"] = m->character;
        j["location"] = m->location;
        j["t"] = m->t;
    } else if (const auto* x = std::get_if<CrossPaths>(&spec)) {
        j["type"] = "cross_paths";
        j["characters"] = x->characters;
        j["location"] = x->location;
        j["t"] = x->t;
    } else if (const auto* w = std::get_if<ExclusiveRandom>(&spec)) {
        j["type"] = "exclusive_random";
        j["protected"] = w->protected_characters;
        j["t_start"] = w->t_start;
        j["t_end"] = w->t_end;
    }
    return j;
}

EventSpec spec_from_json(const ordered_json& j, int index) {
    const std::string locus = "events[" + std::to_string(index) + "]";
    if (!j.is_object() || !j.contains("type")) {
        throw ParseError("event spec must be an object with a 'type'", locus);
    }
    const std::string type = j.at("type").get<std::string>();
    try {
        if (type == "move_at") {
            return MoveAt{j.at("character").get<CharacterId>(),
                          j.at("location").get<LocationId>(), j.at("t").get<int>()};
        }
        if (type == "cross_paths") {
            return CrossPaths{j.at("characters").get<std::vector<CharacterId>>(),
                              j.at("location").get<LocationId>(), j.at("t").get<int>()};
        }
        if (type == "exclusive_random") {
            return ExclusiveRandom{j.at("protected").get<std::vector<CharacterId>>(),
                                   j.at("t_start").get<int>(), j.at("t_end").get<int>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), locus);
    }
    throw ParseError("unknown event spec type '" + type + "'", locus);
}

}  // namespace

std::string board_to_json(const Storyboard& sb) {
    ordered_json j;
    j["characters"] = sb.characters;
    j["actions"] = sb.actions;
    ordered_json graph;
    graph["vertices"] = sb.graph.vertices;
    ordered_json edges = ordered_json::array();
    for (const auto& [from, to] : sb.graph.edges) {
        edges.push_back(ordered_json::array({from, to}));
    }
    graph["edges"] = std::move(edges);
    graph["start"] = sb.graph.start_vertex;
    j["graph"] = std::move(graph);
    ordered_json events = ordered_json::array();
    for (const auto& spec : sb.event_specs) events.push_back(spec_to_json(spec));
    j["events"] = std::move(events);
    j["horizon"] = sb.horizon;
    j["environment"] = to_string(sb.environment);
    j["entity_kind"] = to_string(sb.entity_kind);
    return j.dump(2);
}

Storyboard board_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), "byte " + std::to_string(e.byte));
    }
    Storyboard sb;
    try {
        sb.characters = j.at("characters").get<std::vector<CharacterId>>();
        sb.actions = j.at("actions").get<std::vector<ActionId>>();
        const auto& graph = j.at("graph");
        sb.graph.vertices = graph.at("vertices").get<std::vector<LocationId>>();
        for (const auto& e : graph.at("edges")) {
            if (!e.is_array() || e.size() != 2) {
                throw ParseError("edge must be a [from, to] pair", "field: graph.edges");
            }
            sb.graph.edges.emplace_back(e[0].get<LocationId>(), e[1].get<LocationId>());
        }
        sb.graph.start_vertex = graph.at("start").get<LocationId>();
        const auto& events = j.at("events");
        for (int i = 0; i < static_cast<int>(events.size()); ++i) {
            sb.event_specs.push_back(spec_from_json(events[i], i));
        }
        sb.horizon = j.at("horizon").get<int>();
        sb.environment = environment_from_string(j.at("environment").get<std::string>());
        sb.entity_kind = entity_kind_from_string(j.at("entity_kind").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), "board document");
    }
    return sb;
}

Storyboard load_board(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open board file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    Storyboard sb = board_from_json(buffer.str());
    ValidationReport report = validate_storyboard(sb);
    if (!report.empty()) {
        throw ValidationError(std::move(report));
    }
    return sb;
}

void save_board(const Storyboard& sb, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open board file for writing: " + path.string());
    }
    out << board_to_json(sb) << "\n";
    if (!out) {
        throw IoError("failed writing board file: " + path.string());
    }
}

}  // namespace tomsim
