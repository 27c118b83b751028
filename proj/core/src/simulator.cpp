#include "tomsim/simulator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <sstream>

#include "tomsim/rng.hpp"

namespace tomsim {

namespace {

ActionId action_for(const Storyboard& sb, int dest_index, int start_index) {
    if (sb.entity_kind == EntityKind::inanimate) return "is_moved";
    switch (sb.environment) {
        case EnvironmentTag::hallways_doors:
            return "enters";
        case EnvironmentTag::holes_field:
            return dest_index == start_index ? "jump_out" : "jump_in";
        case EnvironmentTag::conference_call:
            return dest_index == start_index ? "hangs_up" : "joins";
    }
    return "enters";
}

struct GraphIndex {
    std::map<LocationId, int> loc_index;
    std::vector<std::vector<int>> adjacency;  // out-neighbors, vertex order
    std::vector<std::vector<bool>> edge;
    int start = 0;

    explicit GraphIndex(const LocationGraph& g) {
        const int n = static_cast<int>(g.vertices.size());
        for (int i = 0; i < n; ++i) loc_index[g.vertices[i]] = i;
        adjacency.assign(n, {});
        edge.assign(n, std::vector<bool>(n, false));
        for (const auto& [from, to] : g.edges) {
            auto fi = loc_index.find(from);
            auto ti = loc_index.find(to);
            if (fi == loc_index.end() || ti == loc_index.end()) continue;
            if (fi->second == ti->second) continue;
            if (!edge[fi->second][ti->second]) {
                edge[fi->second][ti->second] = true;
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (edge[i][j]) adjacency[i].push_back(j);
            }
        }
        start = loc_index.at(g.start_vertex);
    }

    // Shortest path as a vertex list [from, ..., to]; empty when unreachable.
    std::vector<int> path(int from, int to) const {
        if (from == to) return {from};
        std::vector<int> parent(adjacency.size(), -1);
        std::deque<int> queue{from};
        parent[from] = from;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int w : adjacency[v]) {
                if (parent[w] != -1) continue;
                parent[w] = v;
                if (w == to) {
                    std::vector<int> out{to};
                    while (out.back() != from) out.push_back(parent[out.back()]);
                    std::reverse(out.begin(), out.end());
                    return out;
                }
                queue.push_back(w);
            }
        }
        return {};
    }
};

}  // namespace

Story::Story(Storyboard board, Seed seed, std::vector<Event> events)
    : board_(std::move(board)), seed_(seed), events_(std::move(events)) {
    const int chars = static_cast<int>(board_.characters.size());
    std::map<CharacterId, int> cindex;
    for (int i = 0; i < chars; ++i) cindex[board_.characters[i]] = i;
    std::map<LocationId, int> lindex;
    for (int i = 0; i < static_cast<int>(board_.graph.vertices.size()); ++i) {
        lindex[board_.graph.vertices[i]] = i;
    }
    auto start_it = lindex.find(board_.graph.start_vertex);
    if (start_it == lindex.end()) {
        throw InvalidParams("story board start vertex is not a graph vertex");
    }
    positions_.assign(events_.size() + 1,
                      std::vector<std::int16_t>(chars, static_cast<std::int16_t>(start_it->second)));
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const Event& e = events_[i];
        if (e.t != static_cast<int>(i) + 1) {
            throw InvalidParams("story events must carry consecutive 1-based timesteps");
        }
        auto ci = cindex.find(e.actor);
        if (ci == cindex.end()) {
            throw InvalidParams("event actor '" + e.actor + "' is not a board character");
        }
        auto li = lindex.find(e.location);
        if (li == lindex.end()) {
            throw InvalidParams("event location '" + e.location + "' is not a graph vertex");
        }
        positions_[i + 1] = positions_[i];
        positions_[i + 1][ci->second] = static_cast<std::int16_t>(li->second);
    }
}

int Story::character_index(const CharacterId& c) const {
    auto it = std::find(board_.characters.begin(), board_.characters.end(), c);
    if (it == board_.characters.end()) {
        throw InvalidParams("unknown character '" + c + "'");
    }
    return static_cast<int>(it - board_.characters.begin());
}

int Story::location_index(const LocationId& l) const {
    auto it = std::find(board_.graph.vertices.begin(), board_.graph.vertices.end(), l);
    if (it == board_.graph.vertices.end()) {
        throw InvalidParams("unknown location '" + l + "'");
    }
    return static_cast<int>(it - board_.graph.vertices.begin());
}

const LocationId& Story::position_at(int t, const CharacterId& c) const {
    return board_.graph.vertices[static_cast<std::size_t>(
        position_index_at(t, character_index(c)))];
}

int Story::position_index_at(int t, int character_index) const {
    if (t < 0 || t >= static_cast<int>(positions_.size())) {
        throw InvalidParams("timestep " + std::to_string(t) + " out of range");
    }
    return positions_[static_cast<std::size_t>(t)][static_cast<std::size_t>(character_index)];
}

const char* to_string(CheckCode code) {
    switch (code) {
        case CheckCode::LENGTH_MISMATCH: return "LENGTH_MISMATCH";
        case CheckCode::UNKNOWN_ACTOR: return "UNKNOWN_ACTOR";
        case CheckCode::UNKNOWN_LOCATION: return "UNKNOWN_LOCATION";
        case CheckCode::ILLEGAL_MOVE: return "ILLEGAL_MOVE";
        case CheckCode::PINNED_UNMET: return "PINNED_UNMET";
        case CheckCode::PROTECTED_MOVED: return "PROTECTED_MOVED";
    }
    return "UNKNOWN_CODE";
}

namespace {

struct Requirement {
    int fire_t = 0;        // when the event spec takes effect
    int loc = 0;           // required location index
    bool is_move_event = false;
    int hop_slot = -1;     // timestep of the final hop, -1 when no hop needed
};

struct Plan {
    std::vector<std::optional<std::pair<int, int>>> claimed;  // t -> (char, dest)
    std::vector<std::vector<Requirement>> reqs;               // per character, fire order
    std::vector<int> freeze_until;                            // per character
    std::vector<std::vector<bool>> protected_at;              // [t][char]
};

int prev_fire(const std::vector<Requirement>& reqs, int before_t) {
    int fire = 0;
    for (const auto& r : reqs) {
        if (r.fire_t < before_t) fire = std::max(fire, r.fire_t);
    }
    return fire;
}

int prev_loc(const std::vector<Requirement>& reqs, int before_t, int start) {
    int loc = start;
    int best = 0;
    for (const auto& r : reqs) {
        if (r.fire_t < before_t && r.fire_t >= best) {
            best = r.fire_t;
            loc = r.loc;
        }
    }
    return loc;
}

void insert_sorted(std::vector<Requirement>& reqs, Requirement r) {
    auto it = std::upper_bound(reqs.begin(), reqs.end(), r.fire_t,
                               [](int t, const Requirement& x) { return t < x.fire_t; });
    reqs.insert(it, std::move(r));
}

Plan build_plan(const Storyboard& sb, const GraphIndex& graph,
                const std::map<CharacterId, int>& cindex, SplitMix64& rng) {
    const int n = sb.horizon;
    const int chars = static_cast<int>(sb.characters.size());
    Plan plan;
    plan.claimed.assign(n + 1, std::nullopt);
    plan.reqs.assign(chars, {});
    plan.freeze_until.assign(chars, 0);
    plan.protected_at.assign(n + 1, std::vector<bool>(chars, false));

    for (const auto& spec : sb.event_specs) {
        if (const auto* w = std::get_if<ExclusiveRandom>(&spec)) {
            for (int t = std::max(1, w->t_start); t <= std::min(n, w->t_end); ++t) {
                for (const auto& c : w->protected_characters) {
                    plan.protected_at[t][cindex.at(c)] = true;
                }
            }
        }
    }

    // Move pins claim their own timestep.
    for (const auto& spec : sb.event_specs) {
        if (const auto* m = std::get_if<MoveAt>(&spec)) {
            const int ci = cindex.at(m->character);
            plan.claimed[m->t] = {ci, graph.loc_index.at(m->location)};
            insert_sorted(plan.reqs[ci],
                          Requirement{m->t, graph.loc_index.at(m->location), true, m->t});
        }
    }

    // Cross-paths arrivals, in ascending fire time. Each participant not
    // already anchored at the meeting point claims the nearest free timestep
    // at or before the fire time (and after its previous requirement).
    std::vector<const CrossPaths*> crossings;
    for (const auto& spec : sb.event_specs) {
        if (const auto* x = std::get_if<CrossPaths>(&spec)) crossings.push_back(x);
    }
    std::stable_sort(crossings.begin(), crossings.end(),
                     [](const CrossPaths* a, const CrossPaths* b) { return a->t < b->t; });
    for (const CrossPaths* x : crossings) {
        const int loc = graph.loc_index.at(x->location);
        std::vector<int> participants;
        for (const auto& c : x->characters) participants.push_back(cindex.at(c));
        rng.shuffle(participants);
        for (int ci : participants) {
            const int anchored = prev_loc(plan.reqs[ci], x->t, graph.start);
            if (anchored == loc) {
                insert_sorted(plan.reqs[ci], Requirement{x->t, loc, false, -1});
                continue;
            }
            const int floor = prev_fire(plan.reqs[ci], x->t);
            int slot = -1;
            for (int s = x->t; s > floor; --s) {
                if (!plan.claimed[s].has_value()) {
                    slot = s;
                    break;
                }
            }
            if (slot < 0) {
                throw Unsatisfiable("cross_paths at t=" + std::to_string(x->t) +
                                    " needs more free preceding timesteps than available");
            }
            plan.claimed[slot] = {ci, loc};
            insert_sorted(plan.reqs[ci], Requirement{x->t, loc, false, slot});
        }
    }

    // Expand multi-hop travel and escape hops, character by character.
    for (int ci = 0; ci < chars; ++ci) {
        int at = graph.start;
        int at_t = 0;
        for (const auto& req : plan.reqs[ci]) {
            if (!req.is_move_event && req.hop_slot < 0) {
                at = req.loc;
                at_t = req.fire_t;
                continue;
            }
            const int final_slot = req.is_move_event ? req.fire_t : req.hop_slot;
            if (req.is_move_event && at == req.loc) {
                // The pinned event must be a real move, so leave first.
                std::vector<int> options;
                for (int x : graph.adjacency[at]) {
                    if (x != at && graph.edge[x][req.loc]) options.push_back(x);
                }
                if (options.empty()) {
                    throw Unsatisfiable("no vertex allows leaving and re-entering '" +
                                        sb.graph.vertices[req.loc] + "'");
                }
                const int via = options[rng.below(options.size())];
                int slot = -1;
                for (int s = final_slot - 1; s > at_t; --s) {
                    if (!plan.claimed[s].has_value()) {
                        slot = s;
                        break;
                    }
                }
                if (slot < 0) {
                    throw Unsatisfiable("no free timestep before t=" +
                                        std::to_string(req.fire_t) + " for '" +
                                        sb.characters[ci] + "' to leave its pinned vertex");
                }
                plan.claimed[slot] = {ci, via};
            } else {
                auto path = graph.path(at, req.loc);
                if (path.empty()) {
                    throw Unsatisfiable("no path from '" + sb.graph.vertices[at] + "' to '" +
                                        sb.graph.vertices[req.loc] + "'");
                }
                const int intermediates = static_cast<int>(path.size()) - 2;
                if (intermediates > 0) {
                    std::vector<int> slots;
                    for (int s = final_slot - 1; s > at_t && static_cast<int>(slots.size()) <
                                                               intermediates; --s) {
                        if (!plan.claimed[s].has_value()) slots.push_back(s);
                    }
                    if (static_cast<int>(slots.size()) < intermediates) {
                        throw Unsatisfiable("not enough free timesteps to route '" +
                                            sb.characters[ci] + "' to '" +
                                            sb.graph.vertices[req.loc] + "'");
                    }
                    std::reverse(slots.begin(), slots.end());
                    for (int k = 0; k < intermediates; ++k) {
                        plan.claimed[slots[k]] = {ci, path[k + 1]};
                    }
                }
            }
            at = req.loc;
            at_t = req.fire_t;
        }
        plan.freeze_until[ci] = at_t;
    }

    // Planned motion must never fall inside a window protecting its actor.
    for (int t = 1; t <= n; ++t) {
        if (!plan.claimed[t].has_value()) continue;
        const int ci = plan.claimed[t]->first;
        if (plan.protected_at[t][ci]) {
            throw Unsatisfiable("realizing the pinned specs would move protected '" +
                                sb.characters[ci] + "' at t=" + std::to_string(t));
        }
    }
    return plan;
}

}  // namespace

Story simulate(const Storyboard& sb, Seed seed) {
    ValidationReport report = validate_storyboard(sb);
    if (!report.empty()) {
        throw ValidationError(std::move(report));
    }

    const GraphIndex graph(sb.graph);
    std::map<CharacterId, int> cindex;
    const int chars = static_cast<int>(sb.characters.size());
    for (int i = 0; i < chars; ++i) cindex[sb.characters[i]] = i;
    const int n = sb.horizon;

    SplitMix64 rng(seed);
    Plan plan = build_plan(sb, graph, cindex, rng);

    std::vector<int> pos(chars, graph.start);
    // Position trace on the nominal timeline, for spec verification.
    std::vector<std::vector<int>> trace(n + 1, std::vector<int>(chars, graph.start));
    std::vector<Event> events;
    std::vector<int> original_t;
    events.reserve(n);

    for (int t = 1; t <= n; ++t) {
        std::optional<std::pair<int, int>> move;
        if (plan.claimed[t].has_value()) {
            const auto [ci, dest] = *plan.claimed[t];
            if (pos[ci] == dest || !graph.edge[pos[ci]][dest]) {
                throw Unsatisfiable("planned move for '" + sb.characters[ci] + "' at t=" +
                                    std::to_string(t) + " is not a legal single hop");
            }
            move = {ci, dest};
        } else {
            std::vector<int> movable;
            for (int ci = 0; ci < chars; ++ci) {
                if (plan.protected_at[t][ci] || t <= plan.freeze_until[ci]) continue;
                bool can_move = false;
                for (int x : graph.adjacency[pos[ci]]) {
                    if (x != pos[ci]) {
                        can_move = true;
                        break;
                    }
                }
                if (can_move) movable.push_back(ci);
            }
            if (!movable.empty()) {
                const int ci = movable[rng.below(movable.size())];
                std::vector<int> dests;
                for (int x : graph.adjacency[pos[ci]]) {
                    if (x != pos[ci]) dests.push_back(x);
                }
                move = {ci, dests[rng.below(dests.size())]};
            }
        }
        if (move.has_value()) {
            const auto [ci, dest] = *move;
            pos[ci] = dest;
            events.push_back(Event{static_cast<int>(events.size()) + 1, sb.characters[ci],
                                   action_for(sb, dest, graph.start),
                                   sb.graph.vertices[dest]});
            original_t.push_back(t);
        }
        trace[t] = pos;
    }

    for (const auto& spec : sb.event_specs) {
        if (const auto* x = std::get_if<CrossPaths>(&spec)) {
            for (const auto& c : x->characters) {
                if (trace[x->t][cindex.at(c)] != graph.loc_index.at(x->location)) {
                    throw Unsatisfiable("cross_paths at t=" + std::to_string(x->t) +
                                        " could not be realized for '" + c + "'");
                }
            }
        }
    }

    if (static_cast<int>(events.size()) == n) {
        return Story(sb, seed, std::move(events));
    }

    // Some free timesteps had no legal actor (every character protected or
    // pinned in place). Drop them and renumber, compressing the board so the
    // returned story still satisfies its own storyboard.
    std::vector<int> new_t_at(n + 1, 0);  // new index of the last emitted slot <= t
    {
        int emitted = 0;
        std::size_t next = 0;
        for (int t = 1; t <= n; ++t) {
            if (next < original_t.size() && original_t[next] == t) {
                ++emitted;
                ++next;
            }
            new_t_at[t] = emitted;
        }
    }
    Storyboard compressed = sb;
    compressed.horizon = static_cast<int>(events.size());
    compressed.event_specs.clear();
    for (const auto& spec : sb.event_specs) {
        if (const auto* m = std::get_if<MoveAt>(&spec)) {
            MoveAt shifted = *m;
            shifted.t = new_t_at[m->t];
            compressed.event_specs.push_back(shifted);
        } else if (const auto* x = std::get_if<CrossPaths>(&spec)) {
            if (new_t_at[x->t] == 0) continue;  // satisfied by the initial state
            CrossPaths shifted = *x;
            shifted.t = new_t_at[x->t];
            compressed.event_specs.push_back(shifted);
        } else if (const auto* w = std::get_if<ExclusiveRandom>(&spec)) {
            // Keep exactly the surviving covered timesteps.
            const int lo = new_t_at[w->t_start - 1] + 1;
            const int hi = new_t_at[w->t_end];
            if (lo > hi) continue;
            ExclusiveRandom shifted = *w;
            shifted.t_start = lo;
            shifted.t_end = hi;
            compressed.event_specs.push_back(shifted);
        }
    }
    return Story(std::move(compressed), seed, std::move(events));
}

ViolationList check_constraints(const Story& story, const Storyboard& sb) {
    ViolationList out;
    auto add = [&](CheckCode code, int t, std::string detail) {
        out.items.push_back({code, t, std::move(detail)});
    };

    const auto& events = story.events();
    const int len = static_cast<int>(events.size());
    if (len != sb.horizon) {
        add(CheckCode::LENGTH_MISMATCH, len,
            "story has " + std::to_string(len) + " events, horizon is " +
                std::to_string(sb.horizon));
    }

    const GraphIndex graph(sb.graph);
    std::map<CharacterId, int> cindex;
    for (int i = 0; i < static_cast<int>(sb.characters.size()); ++i) {
        cindex[sb.characters[i]] = i;
    }

    // Fold positions over the checked storyboard (not the story's own board).
    std::vector<std::vector<int>> trace(len + 1,
                                        std::vector<int>(sb.characters.size(), graph.start));
    bool unknown_actor_reported = false;
    bool unknown_location_reported = false;
    bool illegal_reported = false;
    for (int i = 0; i < len; ++i) {
        const Event& e = events[i];
        const int t = i + 1;
        trace[t] = trace[t - 1];
        auto ci = cindex.find(e.actor);
        if (ci == cindex.end()) {
            if (!unknown_actor_reported) {
                add(CheckCode::UNKNOWN_ACTOR, t, "'" + e.actor + "'");
                unknown_actor_reported = true;
            }
            continue;
        }
        auto li = graph.loc_index.find(e.location);
        if (li == graph.loc_index.end()) {
            if (!unknown_location_reported) {
                add(CheckCode::UNKNOWN_LOCATION, t, "'" + e.location + "'");
                unknown_location_reported = true;
            }
            continue;
        }
        const int src = trace[t][ci->second];
        if (!illegal_reported) {
            if (src == li->second) {
                add(CheckCode::ILLEGAL_MOVE, t,
                    "'" + e.actor + "' is already at '" + e.location + "'");
                illegal_reported = true;
            } else if (!graph.edge[src][li->second]) {
                add(CheckCode::ILLEGAL_MOVE, t,
                    "no edge from '" + sb.graph.vertices[src] + "' to '" + e.location + "'");
                illegal_reported = true;
            }
        }
        trace[t][ci->second] = li->second;
    }

    for (std::size_t s = 0; s < sb.event_specs.size(); ++s) {
        const auto& spec = sb.event_specs[s];
        if (const auto* m = std::get_if<MoveAt>(&spec)) {
            if (m->t < 1 || m->t > len) {
                add(CheckCode::PINNED_UNMET, std::min(m->t, len),
                    "move_at spec " + std::to_string(s) + " pinned beyond the story");
                continue;
            }
            const Event& e = events[m->t - 1];
            if (e.actor != m->character || e.location != m->location) {
                add(CheckCode::PINNED_UNMET, m->t,
                    "expected '" + m->character + "' -> '" + m->location + "', saw '" +
                        e.actor + "' -> '" + e.location + "'");
            }
        } else if (const auto* x = std::get_if<CrossPaths>(&spec)) {
            if (x->t < 1 || x->t > len) {
                add(CheckCode::PINNED_UNMET, std::min(x->t, len),
                    "cross_paths spec " + std::to_string(s) + " pinned beyond the story");
                continue;
            }
            auto li = graph.loc_index.find(x->location);
            bool met = li != graph.loc_index.end();
            if (met) {
                for (const auto& c : x->characters) {
                    auto ci = cindex.find(c);
                    if (ci == cindex.end() || trace[x->t][ci->second] != li->second) {
                        met = false;
                        break;
                    }
                }
            }
            if (!met) {
                add(CheckCode::PINNED_UNMET, x->t,
                    "cross_paths at '" + x->location + "' not realized");
            }
        } else if (const auto* w = std::get_if<ExclusiveRandom>(&spec)) {
            for (int t = std::max(1, w->t_start); t <= std::min(len, w->t_end); ++t) {
                const Event& e = events[t - 1];
                if (std::find(w->protected_characters.begin(), w->protected_characters.end(),
                              e.actor) != w->protected_characters.end()) {
                    add(CheckCode::PROTECTED_MOVED, t,
                        "protected '" + e.actor + "' moved inside [" +
                            std::to_string(w->t_start) + ", " + std::to_string(w->t_end) + "]");
                    break;  // first offending timestep per window
                }
            }
        }
    }

    std::stable_sort(out.items.begin(), out.items.end(),
                     [](const Violation& a, const Violation& b) { return a.timestep < b.timestep; });
    return out;
}

}  // namespace tomsim
