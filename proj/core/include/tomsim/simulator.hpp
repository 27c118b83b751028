#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tomsim/storyboard.hpp"
#include "tomsim/types.hpp"

namespace tomsim {

// One concrete story event: `actor` moves into `location` at timestep t.
struct Event {
    int t = 0;
    CharacterId actor;
    ActionId action;
    LocationId location;

    bool operator==(const Event&) const = default;
};

// An ordered event sequence plus the per-timestep position table derived
// from it. Immutable after construction and safe to share across threads.
class Story {
public:
    Story(Storyboard board, Seed seed, std::vector<Event> events);

    const Storyboard& board() const { return board_; }
    Seed seed() const { return seed_; }
    const std::vector<Event>& events() const { return events_; }
    int length() const { return static_cast<int>(events_.size()); }

    int num_characters() const { return static_cast<int>(board_.characters.size()); }
    int num_locations() const { return static_cast<int>(board_.graph.vertices.size()); }
    int character_index(const CharacterId& c) const;   // throws InvalidParams
    int location_index(const LocationId& l) const;     // throws InvalidParams

    // Positions at the end of timestep t (t = 0 is the initial state, where
    // every character occupies the start vertex).
    const LocationId& position_at(int t, const CharacterId& c) const;
    int position_index_at(int t, int character_index) const;

private:
    Storyboard board_;
    Seed seed_ = 0;
    std::vector<Event> events_;
    std::vector<std::vector<std::int16_t>> positions_;  // [t][character]
};

enum class CheckCode {
    LENGTH_MISMATCH,
    UNKNOWN_ACTOR,
    UNKNOWN_LOCATION,
    ILLEGAL_MOVE,
    PINNED_UNMET,
    PROTECTED_MOVED,
};

const char* to_string(CheckCode code);

struct Violation {
    CheckCode code;
    int timestep = 0;  // first offending timestep
    std::string detail;
};

struct ViolationList {
    std::vector<Violation> items;
    bool empty() const { return items.empty(); }
};

// Generates a story satisfying every event spec of a valid storyboard,
// filling free timesteps with uniformly random legal moves. Deterministic in
// (sb, seed); the RNG consumption order is fixed:
//   1. one participant shuffle per CrossPaths, in ascending fire time;
//   2. one draw per escape hop (characters pinned onto their current vertex);
//   3. two draws per free timestep, in ascending time: actor, destination.
//
// Characters with a pending pinned requirement hold their position until it
// is realized, so pinned meetings are the first meetings of their
// participants. When no character may legally move at a free timestep, the
// timestep is dropped and the returned story (with a correspondingly
// compressed board) is shorter than the nominal horizon.
//
// Throws Unsatisfiable when the pinned specs cannot be realized and
// ValidationError when the board itself is invalid.
Story simulate(const Storyboard& sb, Seed seed);

// Checks an arbitrary story against a storyboard: pinned specs realized,
// no protected character moved inside its window, every move adjacent and
// non-stationary, length equal to the horizon. Empty list == adherent.
ViolationList check_constraints(const Story& story, const Storyboard& sb);

}  // namespace tomsim
