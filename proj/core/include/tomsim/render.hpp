#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tomsim/epistemics.hpp"
#include "tomsim/simulator.hpp"
#include "tomsim/types.hpp"

namespace tomsim {

// Sentence for one event. Environment templates:
//   hallways_doors    "{Actor} enters {location}."
//   holes_field       "{Actor} jumps into hole {k}." /
//                     "{Actor} jumps back out into the field."
//   conference_call   "{Actor} joins a call with the {callee}." /
//                     "{Actor} hangs up the phone."
//   inanimate         "The {object} is moved to {location}."
std::string render_event(const Event& event, EnvironmentTag env,
                         EntityKind kind = EntityKind::animate);

// Inverse of render_event over the valid token pools; nullopt when the line
// does not match the environment's templates. `t` is stamped into the result.
std::optional<Event> parse_event_line(const std::string& line, EnvironmentTag env, int t,
                                      EntityKind kind = EntityKind::animate);

// One sentence per line, newline-separated, no trailing newline.
std::string render_story(const Story& story);

std::string render_question(const Question& q, EnvironmentTag env);

// Surface form of a location as it appears in answers:
//   hallways_doors  "room_3", "the_hallway"
//   holes_field     "hole 1", "the field"
//   conference_call "city hall", "no call"
std::string location_surface(const LocationId& loc, EnvironmentTag env);

struct PromptTemplate {
    int id = 0;           // 1..12
    std::string text;     // exact instruction text
};

// The bundled instruction library. Template 1 is the default used by the
// main experiments.
const std::vector<PromptTemplate>& prompt_templates();
const PromptTemplate& prompt_template(int id);  // throws UnknownTemplate

// Data-file round trip for the template library (JSON keyed by id).
std::vector<PromptTemplate> load_prompt_templates(const std::filesystem::path& path);
void save_prompt_templates(const std::vector<PromptTemplate>& templates,
                           const std::filesystem::path& path);

// instruction, blank line, story, blank line, "Question: " + question.
std::string build_prompt(int template_id, const std::string& story_text,
                         const std::string& question_text);

class TextTransformer {
public:
    virtual ~TextTransformer() = default;
    virtual std::string transform(const std::string& sentence, double temperature) = 0;
};

class IdentityTransformer final : public TextTransformer {
public:
    std::string transform(const std::string& sentence, double /*temperature*/) override {
        return sentence;
    }
};

// Replays canned outputs in order; once exhausted it echoes the input.
class ReplayTransformer final : public TextTransformer {
public:
    explicit ReplayTransformer(std::vector<std::string> outputs)
        : outputs_(std::move(outputs)) {}
    std::string transform(const std::string& sentence, double temperature) override;

private:
    std::vector<std::string> outputs_;
    std::size_t next_ = 0;
};

struct ParaphraseOptions {
    double temperature = 1.3;
    int max_retries = 2;        // re-asks per line after a failed guard
    bool allow_fallback = true; // keep the template sentence when retries run out
};

struct ParaphrasedStory {
    std::vector<std::string> lines;
    std::vector<bool> fallback;  // line kept un-paraphrased after guard failures

    std::string text() const;
    bool any_fallback() const;
};

// Paraphrases each event sentence independently, in timestep order. A guard
// requires the actor and location surface tokens to survive verbatim in each
// paraphrased line; failing lines are retried, then kept un-paraphrased when
// fallback is allowed, else GuardExhausted is thrown.
ParaphrasedStory paraphrase_story(const Story& story, TextTransformer& tx,
                                  const ParaphraseOptions& options = {});

}  // namespace tomsim
