#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tomsim/simulator.hpp"
#include "tomsim/storyboard.hpp"

namespace tomsim {

// A belief about a location: known vertex or never-observed.
struct Belief {
    std::optional<LocationId> value;

    bool known() const { return value.has_value(); }
    bool operator==(const Belief&) const = default;
};

enum class QuestionKind {
    ToM1,
    ToM2,
    WM_Human,
    WM_Inanimate,
};

const char* to_string(QuestionKind kind);
QuestionKind question_kind_from_string(const std::string& s);

struct Question {
    QuestionKind kind = QuestionKind::ToM1;
    RoleBinding roles;
};

// Truth positions, first-order beliefs b1[observer][subject], and
// second-order beliefs b2[observer][mediator][subject] at every timestep
// t in [0, horizon]. Built by track(); immutable afterwards.
//
// Update rules applied per event (c moves l_from -> l_to), in order:
//   R1  truth[c] <- l_to
//   R2  every character at l_from (including c) learns b1[., c] = l_to
//   R3  every character at l_to after the move learns b1 of every other
//       character there (mutual awareness of the room's occupants)
//   R4  departure witnesses also learn that each other witness knows
//       where c went: b2[o][w][c] = l_to
//   R5  arrival co-occupants learn the same one level down:
//       b2[o][w][s] = l_to for all present o, w, s
// Entries not touched by a rule persist unchanged.
class BeliefTimeline {
public:
    BeliefTimeline(const Story& story, std::vector<std::vector<std::int16_t>> truth,
                   std::vector<std::vector<std::int16_t>> b1,
                   std::vector<std::vector<std::int16_t>> b2);

    int horizon() const { return static_cast<int>(truth_.size()) - 1; }
    int num_characters() const { return chars_; }

    const LocationId& truth(int t, const CharacterId& character) const;
    Belief b1(int t, const CharacterId& observer, const CharacterId& subject) const;
    Belief b2(int t, const CharacterId& observer, const CharacterId& mediator,
              const CharacterId& subject) const;

    // Index-based accessors used by the oracle-equivalence tests.
    int truth_index(int t, int character) const;
    int b1_index(int t, int observer, int subject) const;              // -1 == unknown
    int b2_index(int t, int observer, int mediator, int subject) const;

    // Diagnostic table, one row per (t, relation, observer[, mediator],
    // subject, value).
    std::string dump() const;

private:
    int index_of(const CharacterId& c) const;

    std::vector<CharacterId> characters_;
    std::vector<LocationId> locations_;
    int chars_ = 0;
    std::vector<std::vector<std::int16_t>> truth_;  // [t][c]
    std::vector<std::vector<std::int16_t>> b1_;     // [t][o*C + s]
    std::vector<std::vector<std::int16_t>> b2_;     // [t][(o*C + m)*C + s]
};

// Runs the belief update rules over the whole story. Throws
// InconsistentStory when an event does not move its actor (the positions
// table and the event list disagree).
BeliefTimeline track(const Story& story);

// Final-timestep belief queries. Throw UnknownBelief when the entry was
// never established (impossible for stories that begin fully co-located).
LocationId tom1_answer(const Story& story, const CharacterId& s1, const CharacterId& target);
LocationId tom2_answer(const Story& story, const CharacterId& s1, const CharacterId& s2,
                       const CharacterId& target);

// World-model query: find the first timestep t >= 1 at which the observers
// and the target become co-located (a meeting newly established at t, not
// the shared start state continuing from t=0), then report the destination
// of the target's first move strictly after t.
LocationId wm_answer(const Story& story, const std::vector<CharacterId>& observers,
                     const CharacterId& target);

// Location of the earliest co-location of all `chars` newly established at
// some timestep t >= 1; nullopt when they never meet after the start state.
std::optional<LocationId> first_common_location(const Story& story,
                                                const std::vector<CharacterId>& chars);

}  // namespace tomsim
