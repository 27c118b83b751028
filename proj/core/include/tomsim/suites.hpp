#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tomsim/epistemics.hpp"
#include "tomsim/render.hpp"
#include "tomsim/simulator.hpp"
#include "tomsim/types.hpp"

namespace tomsim {

struct Distractors {
    std::string first_common_location;  // surface form, "" when the oracle finds none
    std::string true_final_location;    // surface form of the target's final position

    bool operator==(const Distractors&) const = default;
};

// One dataset row. `ground_truth` and the distractors are surface forms
// produced by the epistemics oracle on the record's own events.
struct QARecord {
    std::string id;
    EnvironmentTag environment = EnvironmentTag::hallways_doors;
    Question question;
    int order = 1;
    int mislead_distance = 0;
    Seed seed = 0;
    int num_characters = 0;
    int num_locations = 0;
    int horizon = 0;
    std::vector<Event> events;
    std::string story_text;
    std::string question_text;
    int prompt_template_id = 1;
    std::string ground_truth;
    Distractors distractors;
    bool paraphrased = false;
    std::map<std::string, std::string> meta;
};

struct DatasetManifest {
    std::string suite;
    Seed base_seed = 0;
    std::map<std::string, std::string> grid;
    std::string engine_version;
    std::size_t record_count = 0;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<QARecord> records;
};

struct MisleadOptions {
    int order = 1;
    std::vector<int> distances;
    int trials = 100;
    Seed base_seed = 0;
    EnvironmentTag environment = EnvironmentTag::hallways_doors;
    int template_id = 1;
    int num_characters = 8;
    int num_locations = 6;
    int horizon = 100;
};

// Mislead-distance sweep: `trials` records per distance, ToM question of the
// given order. Records are ordered by (distance, trial).
Dataset gen_mislead_suite(const MisleadOptions& options);

// Three records per trial sharing one second-order story (d=30, horizon
// 100): a ToM2 question, the matching WM question, and the same skeleton
// re-rendered with inanimate entities moved by an unnamed third party.
Dataset gen_tom_wm_triad(int trials, Seed base_seed);

struct CharacterSuiteOptions {
    std::vector<int> counts{8, 16, 32, 64};
    int trials = 50;
    Seed base_seed = 0;
    std::vector<QuestionKind> kinds{QuestionKind::ToM1, QuestionKind::WM_Human};
    int mislead_distance = 30;
    int num_locations = 6;
    int horizon = 100;
    int template_id = 1;
};

// Character-count sweep on the first-order pattern, horizon fixed at 100.
Dataset gen_character_suite(const CharacterSuiteOptions& options);

// Fixed 5-event false-belief replica; every trial has identical structure.
Dataset gen_sally_anne(int trials);

// Line-delimited dataset file: manifest first, one record per line.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

std::string record_to_json_line(const QARecord& record);
QARecord record_from_json_line(const std::string& line, int line_number);

// Reconstructs the storyboard (and role binding) a record was generated
// from, using the suite name in record.meta and the record's parameters.
// For stories shorter than the nominal horizon the deterministically
// re-simulated compressed board is returned.
struct RebuiltBoard {
    Storyboard board;
    RoleBinding roles;
};
RebuiltBoard rebuild_board(const QARecord& record);

// Oracle surface answer for a record's question over its stored events.
std::string oracle_answer(const QARecord& record);

// Recomputed distractor pair for a record over its stored events.
Distractors oracle_distractors(const QARecord& record);

// Replaces each record's story_text with a per-line paraphrase. Guard
// fallbacks are noted in record.meta ("paraphrase_fallback_lines"); the
// original text is kept in meta ("template_story_text").
void apply_paraphrase(Dataset& ds, TextTransformer& tx, const ParaphraseOptions& options = {});

}  // namespace tomsim
