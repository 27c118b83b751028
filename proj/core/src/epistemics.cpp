#include "tomsim/epistemics.hpp"

#include <algorithm>
#include <sstream>

#include "tomsim/errors.hpp"

namespace tomsim {

const char* to_string(QuestionKind kind) {
    switch (kind) {
        case QuestionKind::ToM1: return "tom1";
        case QuestionKind::ToM2: return "tom2";
        case QuestionKind::WM_Human: return "wm_human";
        case QuestionKind::WM_Inanimate: return "wm_inanimate";
    }
    return "tom1";
}

QuestionKind question_kind_from_string(const std::string& s) {
    if (s == "tom1") return QuestionKind::ToM1;
    if (s == "tom2") return QuestionKind::ToM2;
    if (s == "wm_human") return QuestionKind::WM_Human;
    if (s == "wm_inanimate") return QuestionKind::WM_Inanimate;
    throw ParseError("unknown question kind '" + s + "'", "field: question.kind");
}

BeliefTimeline::BeliefTimeline(const Story& story,
                               std::vector<std::vector<std::int16_t>> truth,
                               std::vector<std::vector<std::int16_t>> b1,
                               std::vector<std::vector<std::int16_t>> b2)
    : characters_(story.board().characters),
      locations_(story.board().graph.vertices),
      chars_(static_cast<int>(story.board().characters.size())),
      truth_(std::move(truth)),
      b1_(std::move(b1)),
      b2_(std::move(b2)) {}

int BeliefTimeline::index_of(const CharacterId& c) const {
    auto it = std::find(characters_.begin(), characters_.end(), c);
    if (it == characters_.end()) {
        throw InvalidParams("unknown character '" + c + "'");
    }
    return static_cast<int>(it - characters_.begin());
}

const LocationId& BeliefTimeline::truth(int t, const CharacterId& character) const {
    return locations_[static_cast<std::size_t>(truth_index(t, index_of(character)))];
}

Belief BeliefTimeline::b1(int t, const CharacterId& observer, const CharacterId& subject) const {
    const int v = b1_index(t, index_of(observer), index_of(subject));
    if (v < 0) return Belief{std::nullopt};
    return Belief{locations_[static_cast<std::size_t>(v)]};
}

Belief BeliefTimeline::b2(int t, const CharacterId& observer, const CharacterId& mediator,
                          const CharacterId& subject) const {
    const int v = b2_index(t, index_of(observer), index_of(mediator), index_of(subject));
    if (v < 0) return Belief{std::nullopt};
    return Belief{locations_[static_cast<std::size_t>(v)]};
}

int BeliefTimeline::truth_index(int t, int character) const {
    return truth_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(character)];
}

int BeliefTimeline::b1_index(int t, int observer, int subject) const {
    return b1_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(observer * chars_ + subject)];
}

int BeliefTimeline::b2_index(int t, int observer, int mediator, int subject) const {
    return b2_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(
        (observer * chars_ + mediator) * chars_ + subject)];
}

std::string BeliefTimeline::dump() const {
    std::ostringstream os;
    auto loc_name = [&](int v) -> std::string {
        return v < 0 ? "unknown" : locations_[static_cast<std::size_t>(v)];
    };
    for (int t = 0; t <= horizon(); ++t) {
        for (int c = 0; c < chars_; ++c) {
            os << t << "\ttruth\t" << characters_[c] << "\t" << loc_name(truth_index(t, c))
               << "\n";
        }
        for (int o = 0; o < chars_; ++o) {
            for (int s = 0; s < chars_; ++s) {
                os << t << "\tb1\t" << characters_[o] << "\t" << characters_[s] << "\t"
                   << loc_name(b1_index(t, o, s)) << "\n";
            }
        }
        for (int o = 0; o < chars_; ++o) {
            for (int m = 0; m < chars_; ++m) {
                for (int s = 0; s < chars_; ++s) {
                    os << t << "\tb2\t" << characters_[o] << "\t" << characters_[m] << "\t"
                       << characters_[s] << "\t" << loc_name(b2_index(t, o, m, s)) << "\n";
                }
            }
        }
    }
    return os.str();
}

BeliefTimeline track(const Story& story) {
    const int chars = story.num_characters();
    const int n = story.length();
    const auto start = static_cast<std::int16_t>(
        story.location_index(story.board().graph.start_vertex));

    std::vector<std::int16_t> truth(chars, start);
    // Everyone begins co-located, so all beliefs start out known.
    std::vector<std::int16_t> b1(static_cast<std::size_t>(chars) * chars, start);
    std::vector<std::int16_t> b2(static_cast<std::size_t>(chars) * chars * chars, start);

    std::vector<std::vector<std::int16_t>> truth_out, b1_out, b2_out;
    truth_out.reserve(n + 1);
    b1_out.reserve(n + 1);
    b2_out.reserve(n + 1);
    truth_out.push_back(truth);
    b1_out.push_back(b1);
    b2_out.push_back(b2);

    for (int t = 1; t <= n; ++t) {
        const Event& e = story.events()[t - 1];
        const int actor = story.character_index(e.actor);
        const auto dest = static_cast<std::int16_t>(story.location_index(e.location));
        const std::int16_t from = truth[actor];
        if (from != story.position_index_at(t - 1, actor) || from == dest) {
            throw InconsistentStory("event at t=" + std::to_string(t) +
                                    " does not move its actor from its tracked position");
        }

        // Witness sets before the move takes effect.
        std::vector<int> at_from, at_to;
        for (int c = 0; c < chars; ++c) {
            if (truth[c] == from) at_from.push_back(c);  // includes the actor
            if (truth[c] == dest) at_to.push_back(c);
        }

        // R1: the move itself.
        truth[actor] = dest;

        // R2/R4: everyone who saw the departure knows where the actor went,
        // and knows that the other witnesses know it too.
        for (int o : at_from) {
            b1[static_cast<std::size_t>(o) * chars + actor] = dest;
            for (int w : at_from) {
                b2[(static_cast<std::size_t>(o) * chars + w) * chars + actor] = dest;
            }
        }

        // R3/R5: everyone now at the destination is mutually aware.
        std::vector<int> arrived = at_to;
        arrived.push_back(actor);
        for (int o : arrived) {
            for (int s : arrived) {
                b1[static_cast<std::size_t>(o) * chars + s] = dest;
                for (int w : arrived) {
                    b2[(static_cast<std::size_t>(o) * chars + w) * chars + s] = dest;
                }
            }
        }

        truth_out.push_back(truth);
        b1_out.push_back(b1);
        b2_out.push_back(b2);
    }

    return BeliefTimeline(story, std::move(truth_out), std::move(b1_out), std::move(b2_out));
}

LocationId tom1_answer(const Story& story, const CharacterId& s1, const CharacterId& target) {
    if (s1 == target) {
        throw InvalidParams("tom1 requires distinct observer and target");
    }
    BeliefTimeline timeline = track(story);
    Belief belief = timeline.b1(timeline.horizon(), s1, target);
    if (!belief.known()) {
        throw UnknownBelief("b1[" + s1 + ", " + target + "] was never established");
    }
    return *belief.value;
}

LocationId tom2_answer(const Story& story, const CharacterId& s1, const CharacterId& s2,
                       const CharacterId& target) {
    if (s1 == s2 || s1 == target || s2 == target) {
        throw InvalidParams("tom2 requires pairwise distinct roles");
    }
    BeliefTimeline timeline = track(story);
    Belief belief = timeline.b2(timeline.horizon(), s1, s2, target);
    if (!belief.known()) {
        throw UnknownBelief("b2[" + s1 + ", " + s2 + ", " + target + "] was never established");
    }
    return *belief.value;
}

namespace {

// First timestep t >= 1 at which all `members` are co-located but were not
// all co-located at t-1. The shared start state (established at t=0) does
// not count; only meetings the story itself brings about do.
std::optional<std::pair<int, int>> first_meeting(const Story& story,
                                                 const std::vector<int>& members) {
    auto all_together = [&](int t) -> std::optional<int> {
        const int where = story.position_index_at(t, members.front());
        for (int m : members) {
            if (story.position_index_at(t, m) != where) return std::nullopt;
        }
        return where;
    };
    bool together_before = all_together(0).has_value();
    for (int t = 1; t <= story.length(); ++t) {
        auto here = all_together(t);
        if (here.has_value() && !together_before) {
            return std::make_pair(t, *here);
        }
        together_before = here.has_value();
    }
    return std::nullopt;
}

}  // namespace

LocationId wm_answer(const Story& story, const std::vector<CharacterId>& observers,
                     const CharacterId& target) {
    if (observers.empty()) {
        throw InvalidParams("wm_answer requires at least one observer");
    }
    std::vector<int> members;
    for (const auto& o : observers) {
        if (o == target) {
            throw InvalidParams("the target cannot be one of the observers");
        }
        members.push_back(story.character_index(o));
    }
    const int target_idx = story.character_index(target);
    members.push_back(target_idx);

    auto meeting = first_meeting(story, members);
    if (!meeting.has_value()) {
        throw NoCoLocation("the observers and the target never meet after the start");
    }
    for (int t = meeting->first + 1; t <= story.length(); ++t) {
        const Event& e = story.events()[t - 1];
        if (e.actor == target) {
            return e.location;
        }
    }
    throw NoSubsequentMove("'" + target + "' never moves after the meeting at t=" +
                           std::to_string(meeting->first));
}

std::optional<LocationId> first_common_location(const Story& story,
                                                const std::vector<CharacterId>& chars) {
    if (chars.size() < 2) {
        throw InvalidParams("first_common_location requires at least two characters");
    }
    std::vector<int> members;
    for (const auto& c : chars) members.push_back(story.character_index(c));
    auto meeting = first_meeting(story, members);
    if (!meeting.has_value()) return std::nullopt;
    return story.board().graph.vertices[static_cast<std::size_t>(meeting->second)];
}

}  // namespace tomsim
