#include "tomsim/render.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tomsim/errors.hpp"

namespace tomsim {

namespace {

bool is_start_location(const LocationId& loc, EnvironmentTag env) {
    switch (env) {
        case EnvironmentTag::hallways_doors: return loc == "the_hallway";
        case EnvironmentTag::holes_field: return loc == "the_field";
        case EnvironmentTag::conference_call: return loc == "no_call";
    }
    return false;
}

std::string underscores_to_spaces(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == '_') c = ' ';
    }
    return out;
}

// "hole_3" -> "3"; empty when the id is not a hole.
std::string hole_number(const LocationId& loc) {
    if (loc.rfind("hole_", 0) != 0) return {};
    return loc.substr(5);
}

}  // namespace

std::string render_event(const Event& event, EnvironmentTag env, EntityKind kind) {
    if (kind == EntityKind::inanimate) {
        return "The " + event.actor + " is moved to " + event.location + ".";
    }
    switch (env) {
        case EnvironmentTag::hallways_doors:
            return event.actor + " enters " + event.location + ".";
        case EnvironmentTag::holes_field:
            if (is_start_location(event.location, env)) {
                return event.actor + " jumps back out into the field.";
            }
            return event.actor + " jumps into hole " + hole_number(event.location) + ".";
        case EnvironmentTag::conference_call:
            if (is_start_location(event.location, env)) {
                return event.actor + " hangs up the phone.";
            }
            return event.actor + " joins a call with the " +
                   underscores_to_spaces(event.location) + ".";
    }
    throw UnknownEnvironment("unhandled environment tag");
}

std::optional<Event> parse_event_line(const std::string& line, EnvironmentTag env, int t,
                                      EntityKind kind) {
    auto strip_suffix = [](const std::string& s, const std::string& suffix)
        -> std::optional<std::string> {
        if (s.size() < suffix.size() ||
            s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) {
            return std::nullopt;
        }
        return s.substr(0, s.size() - suffix.size());
    };
    auto split_once = [](const std::string& s, const std::string& sep)
        -> std::optional<std::pair<std::string, std::string>> {
        auto pos = s.find(sep);
        if (pos == std::string::npos) return std::nullopt;
        return std::make_pair(s.substr(0, pos), s.substr(pos + sep.size()));
    };

    if (kind == EntityKind::inanimate) {
        if (line.rfind("The ", 0) != 0) return std::nullopt;
        auto body = strip_suffix(line.substr(4), ".");
        if (!body) return std::nullopt;
        auto parts = split_once(*body, " is moved to ");
        if (!parts) return std::nullopt;
        return Event{t, parts->first, "is_moved", parts->second};
    }

    switch (env) {
        case EnvironmentTag::hallways_doors: {
            auto body = strip_suffix(line, ".");
            if (!body) return std::nullopt;
            auto parts = split_once(*body, " enters ");
            if (!parts) return std::nullopt;
            return Event{t, parts->first, "enters", parts->second};
        }
        case EnvironmentTag::holes_field: {
            if (auto actor = strip_suffix(line, " jumps back out into the field.")) {
                return Event{t, *actor, "jump_out", "the_field"};
            }
            auto body = strip_suffix(line, ".");
            if (!body) return std::nullopt;
            auto parts = split_once(*body, " jumps into hole ");
            if (!parts) return std::nullopt;
            return Event{t, parts->first, "jump_in", "hole_" + parts->second};
        }
        case EnvironmentTag::conference_call: {
            if (auto actor = strip_suffix(line, " hangs up the phone.")) {
                return Event{t, *actor, "hangs_up", "no_call"};
            }
            auto body = strip_suffix(line, ".");
            if (!body) return std::nullopt;
            auto parts = split_once(*body, " joins a call with the ");
            if (!parts) return std::nullopt;
            std::string loc = parts->second;
            for (char& c : loc) {
                if (c == ' ') c = '_';
            }
            return Event{t, parts->first, "joins", loc};
        }
    }
    return std::nullopt;
}

std::string render_story(const Story& story) {
    std::string out;
    const auto& events = story.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0) out += "\n";
        out += render_event(events[i], story.board().environment, story.board().entity_kind);
    }
    return out;
}

namespace {

std::string role_surface(const CharacterId& c, QuestionKind kind) {
    // Inanimate entities read as "the ball"; people read as bare names.
    if (kind == QuestionKind::WM_Inanimate) return "the " + c;
    return c;
}

}  // namespace

std::string render_question(const Question& q, EnvironmentTag env) {
    const CharacterId& s1 = q.roles.s1;
    const CharacterId& target = q.roles.target;
    if (s1.empty() || target.empty()) {
        throw MissingRole("question requires bound s1 and target roles");
    }
    // WM_Human also comes in a single-observer form; the other mediated
    // kinds need both subjects.
    const bool needs_s2 =
        q.kind == QuestionKind::ToM2 || q.kind == QuestionKind::WM_Inanimate;
    if (needs_s2 && !q.roles.s2.has_value()) {
        throw MissingRole("question kind requires a bound s2 role");
    }

    if (env == EnvironmentTag::conference_call) {
        switch (q.kind) {
            case QuestionKind::ToM1:
                return "Who does " + s1 + " think " + target + " is on the phone with?";
            case QuestionKind::ToM2:
                return "Who does " + s1 + " think " + *q.roles.s2 + " thinks " + target +
                       " is on the phone with?";
            case QuestionKind::WM_Human:
                if (q.roles.s2.has_value()) {
                    return "When " + s1 + " and " + *q.roles.s2 + " were on the phone with " +
                           target + ", who did " + target + " call next?";
                }
                return "When " + s1 + " was on the phone with " + target + ", who did " +
                       target + " call next?";
            case QuestionKind::WM_Inanimate:
                return "When " + s1 + " and " + *q.roles.s2 + " were on the phone with " +
                       target + ", who was " + target + " connected to next?";
        }
    }

    switch (q.kind) {
        case QuestionKind::ToM1:
            return "Where does " + s1 + " think " + target + " is?";
        case QuestionKind::ToM2:
            return "Where does " + s1 + " think " + *q.roles.s2 + " thinks " + target +
                   " is?";
        case QuestionKind::WM_Human:
            if (q.roles.s2.has_value()) {
                return "When " + s1 + " and " + *q.roles.s2 + " were in the same room as " +
                       target + ", where did " + target + " go?";
            }
            return "When " + s1 + " was in the same room as " + target + ", where did " +
                   target + " go?";
        case QuestionKind::WM_Inanimate: {
            const std::string a = role_surface(s1, q.kind);
            const std::string b = role_surface(target, q.kind);
            return "When " + a + " and " + role_surface(*q.roles.s2, q.kind) +
                   " were in the same room as " + b + ", where was " + b + " moved to?";
        }
    }
    throw MissingRole("unhandled question kind");
}

std::string location_surface(const LocationId& loc, EnvironmentTag env) {
    switch (env) {
        case EnvironmentTag::hallways_doors:
            return loc;
        case EnvironmentTag::holes_field:
            if (loc == "the_field") return "the field";
            if (auto k = hole_number(loc); !k.empty()) return "hole " + k;
            return underscores_to_spaces(loc);
        case EnvironmentTag::conference_call:
            return underscores_to_spaces(loc);
    }
    return loc;
}

const std::vector<PromptTemplate>& prompt_templates() {
    static const std::vector<PromptTemplate> library = {
        {1,
         "Read the following story and answer the question at the end. Note that all "
         "characters start in the hallway. Characters in the same location can see where "
         "eachother go when someone leaves. If characters are in different locations, they "
         "cannot see eachother. There is enough information to answer every question."},
        {2,
         "Please read the following story and answer the concluding question. Every "
         "character starts in the hallway. Characters who occupy the same location can "
         "observe each other's departures, while those in separate locations cannot. All "
         "questions are answerable, so be sure to provide an answer."},
        {3,
         "INSTRUCTIONS: Read the story and answer the question that follows.\n"
         "All characters begin in the hallway. When two characters share a space, they know "
         "where the other goes upon leaving; characters in different spaces lack this "
         "information. Every question has a sufficient basis in the story, and you must "
         "provide an answer.\n"
         "Story:"},
        {4,
         "Review the story and give the answer to the final question. Characters start out "
         "in the hallway. Characters in the same room always observe each other's movements, "
         "while characters in different rooms remain unaware. The necessary information is "
         "guaranteed to be available; provide the answer succinctly."},
        {5,
         "Read the following narrative and answer the question that appears at the end. All "
         "characters begin in the hallway. Shared locations allow characters to see one "
         "another move; separated characters have no visibility. Rely solely on the "
         "information in the story and give a direct answer."},
        {6,
         "Carefully read the story and respond to the final question. Every character "
         "starts in the hallway. Characters sharing a location know where others go when "
         "they leave; characters in different locations do not. The question can be answered "
         "from the text alone—state your conclusion briefly."},
        {7,
         "Instructions\n"
         "Read the story and answer the question that follows.\n"
         "\n"
         "Rules:\n"
         "- All characters begin in the hallway.\n"
         "- When characters share a location, they observe each other's movements; those in "
         "different places cannot.\n"
         "- When characters share a location, they observe each other's movements; those in "
         "different places cannot.\n"
         "- The answer is fully determined by the story.\n"
         "\n"
         "Provide a concise, final answer."},
        {8,
         "Instructions\n"
         "You will read a story involving characters moving between locations and then "
         "answer comprehension questions.\n"
         "\n"
         "Rules:\n"
         "- All characters start in the hallway.\n"
         "- Characters who share a location can track each other's departures; characters "
         "who are apart cannot\n"
         "- The question is completely answerable from the story.\n"
         "- Provide a single, final answer."},
        {9,
         "Instructions: Read the story about characters moving between different locations, "
         "then answer the question that follows.\n"
         "\n"
         "Rules:\n"
         "- All characters begin in the hallway.\n"
         "- Characters in the same place can observe each other's departures; characters in "
         "different places cannot.\n"
         "- The question is fully answerable from the provided text.\n"
         "- Respond with one clear final answer.\n"
         "Story:"},
        {10,
         "You are an assistant tasked with reading a story about characters moving between "
         "locations and then answering questions based on it. Follow these rules:\n"
         "- All characters start in the hallway.\n"
         "- Characters who share a location can see where others go; characters who are "
         "apart lack this visibility.\n"
         "- The question is fully answerable from the narrative.\n"
         "- Provide one final answer.\n"
         "If it ever seems like information is missing, re-check the story—it always "
         "contains enough clues. Avoid repeating yourself.\n"
         "Story:"},
        {11,
         "You are a helpful reading assistant that will read the provided story about "
         "characters moving between locations, then answer comprehension questions at the "
         "end. Here are some rules that you must remember:\n"
         "\n"
         "- All of the characters start in the hallway.\n"
         "- Characters who share a location know where the other goes when leaving; "
         "characters in separate locations have no visibility.\n"
         "- The question is 100 percent answerable using the given information.\n"
         "- Output a single final answer.\n"
         "\n"
         "If you ever think there isn't enough information in the story, check again, "
         "because the questions are designed to be answerable by the prompt. Try not to "
         "repeat yourself.\n"
         "Story:"},
        {12,
         "INSTRUCTIONS: Read the following story and answer the question at the end.\n"
         "Note that all characters start in the halllway.\n"
         "If two characters are in the same location, then they know where eachother are.\n"
         "If one of them leaves the location, then the other will know where they went.\n"
         "There is enough information to answer every question. You must provide an answer "
         "to every question.\n"
         "\n"
         "Story:"},
    };
    return library;
}

const PromptTemplate& prompt_template(int id) {
    for (const auto& t : prompt_templates()) {
        if (t.id == id) return t;
    }
    throw UnknownTemplate("no prompt template with id " + std::to_string(id));
}

std::vector<PromptTemplate> load_prompt_templates(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open prompt template file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), path.string());
    }
    std::vector<PromptTemplate> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        try {
            out.push_back({std::stoi(it.key()), it.value().get<std::string>()});
        } catch (const std::exception&) {
            throw ParseError("template keys must be integer ids, got '" + it.key() + "'",
                             path.string());
        }
    }
    std::sort(out.begin(), out.end(),
              [](const PromptTemplate& a, const PromptTemplate& b) { return a.id < b.id; });
    return out;
}

void save_prompt_templates(const std::vector<PromptTemplate>& templates,
                           const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& t : templates) {
        j[std::to_string(t.id)] = t.text;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write prompt template file: " + path.string());
    }
    out << j.dump(2) << "\n";
}

std::string build_prompt(int template_id, const std::string& story_text,
                         const std::string& question_text) {
    const PromptTemplate& tpl = prompt_template(template_id);
    return tpl.text + "\n\n" + story_text + "\n\nQuestion: " + question_text;
}

std::string ReplayTransformer::transform(const std::string& sentence, double /*temperature*/) {
    if (next_ < outputs_.size()) {
        return outputs_[next_++];
    }
    return sentence;
}

std::string ParaphrasedStory::text() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out += "\n";
        out += lines[i];
    }
    return out;
}

bool ParaphrasedStory::any_fallback() const {
    return std::find(fallback.begin(), fallback.end(), true) != fallback.end();
}

ParaphrasedStory paraphrase_story(const Story& story, TextTransformer& tx,
                                  const ParaphraseOptions& options) {
    const EnvironmentTag env = story.board().environment;
    ParaphrasedStory out;
    out.lines.reserve(story.events().size());
    out.fallback.reserve(story.events().size());
    for (const Event& event : story.events()) {
        const std::string original =
            render_event(event, env, story.board().entity_kind);
        // Require the tokens the template itself prints. The hang-up
        // sentence carries no location name; its recognizable token is the
        // phrase itself.
        std::string location_token;
        if (story.board().entity_kind == EntityKind::inanimate) {
            location_token = event.location;
        } else if (env == EnvironmentTag::conference_call &&
                   is_start_location(event.location, env)) {
            location_token = "hangs up";
        } else {
            location_token = location_surface(event.location, env);
        }
        auto guard_ok = [&](const std::string& line) {
            return !line.empty() && line.find(event.actor) != std::string::npos &&
                   line.find(location_token) != std::string::npos;
        };
        std::string candidate = tx.transform(original, options.temperature);
        int retries = 0;
        while (!guard_ok(candidate) && retries < options.max_retries) {
            candidate = tx.transform(original, options.temperature);
            ++retries;
        }
        if (guard_ok(candidate)) {
            out.lines.push_back(candidate);
            out.fallback.push_back(false);
        } else if (options.allow_fallback) {
            out.lines.push_back(original);
            out.fallback.push_back(true);
        } else {
            throw GuardExhausted("paraphrase of event at t=" + std::to_string(event.t) +
                                 " kept dropping its actor or location token");
        }
    }
    return out;
}

}  // namespace tomsim
