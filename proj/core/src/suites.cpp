#include "tomsim/suites.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tomsim/errors.hpp"
#include "tomsim/names.hpp"
#include "tomsim/rng.hpp"
#include "tomsim/version.hpp"

namespace tomsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string pad(int value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) {
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    }
    return digits;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(xs[i]);
    }
    return out;
}

std::vector<CharacterId> question_characters(const Question& q) {
    std::vector<CharacterId> chars{q.roles.s1};
    if (q.roles.s2.has_value()) chars.push_back(*q.roles.s2);
    chars.push_back(q.roles.target);
    return chars;
}

Distractors compute_distractors(const Story& story, const Question& q) {
    Distractors out;
    auto fc = first_common_location(story, question_characters(q));
    if (fc.has_value()) {
        out.first_common_location = location_surface(*fc, story.board().environment);
    }
    out.true_final_location = location_surface(
        story.position_at(story.length(), q.roles.target), story.board().environment);
    return out;
}

std::string answer_for(const Story& story, const Question& q) {
    LocationId loc;
    switch (q.kind) {
        case QuestionKind::ToM1:
            loc = tom1_answer(story, q.roles.s1, q.roles.target);
            break;
        case QuestionKind::ToM2:
            if (!q.roles.s2.has_value()) {
                throw MissingRole("tom2 record without a bound s2");
            }
            loc = tom2_answer(story, q.roles.s1, *q.roles.s2, q.roles.target);
            break;
        case QuestionKind::WM_Human:
        case QuestionKind::WM_Inanimate: {
            std::vector<CharacterId> observers{q.roles.s1};
            if (q.roles.s2.has_value()) observers.push_back(*q.roles.s2);
            loc = wm_answer(story, observers, q.roles.target);
            break;
        }
    }
    return location_surface(loc, story.board().environment);
}

QARecord make_record(std::string id, const std::string& suite, const Story& story,
                     const Question& q, int order, int mislead_distance, Seed seed,
                     int nominal_horizon, int template_id) {
    QARecord rec;
    rec.id = std::move(id);
    rec.environment = story.board().environment;
    rec.question = q;
    rec.order = order;
    rec.mislead_distance = mislead_distance;
    rec.seed = seed;
    rec.num_characters = story.num_characters();
    rec.num_locations = story.num_locations();
    rec.horizon = nominal_horizon;
    rec.events = story.events();
    rec.story_text = render_story(story);
    rec.question_text = render_question(q, rec.environment);
    rec.prompt_template_id = template_id;
    rec.ground_truth = answer_for(story, q);
    rec.distractors = compute_distractors(story, q);
    rec.meta["suite"] = suite;
    if (story.length() != nominal_horizon) {
        rec.meta["effective_horizon"] = std::to_string(story.length());
    }
    return rec;
}

struct InanimateStory {
    Storyboard board;
    std::vector<Event> events;
    RoleBinding roles;
};

// Re-skins an animate story with object entities moved by an unnamed third
// party. The substitution is a pure function of the record seed.
InanimateStory make_inanimate(const Storyboard& board, const std::vector<Event>& events,
                              const RoleBinding& roles, Seed record_seed) {
    SplitMix64 rng(derive_seed(record_seed, "inanimate"));
    std::vector<std::string> objects =
        sample_names(inanimate_name_pool(), board.characters.size(), rng);
    std::map<CharacterId, CharacterId> rename;
    for (std::size_t i = 0; i < board.characters.size(); ++i) {
        rename[board.characters[i]] = objects[i];
    }

    InanimateStory out;
    out.board = board;
    out.board.characters = objects;
    out.board.entity_kind = EntityKind::inanimate;
    out.board.actions = {"is_moved"};
    for (auto& spec : out.board.event_specs) {
        if (auto* m = std::get_if<MoveAt>(&spec)) {
            m->character = rename.at(m->character);
        } else if (auto* x = std::get_if<CrossPaths>(&spec)) {
            for (auto& c : x->characters) c = rename.at(c);
        } else if (auto* w = std::get_if<ExclusiveRandom>(&spec)) {
            for (auto& c : w->protected_characters) c = rename.at(c);
        }
    }
    out.events = events;
    for (auto& e : out.events) {
        e.actor = rename.at(e.actor);
        e.action = "is_moved";
    }
    out.roles.s1 = rename.at(roles.s1);
    if (roles.s2.has_value()) out.roles.s2 = rename.at(*roles.s2);
    out.roles.target = rename.at(roles.target);
    return out;
}

}  // namespace

Dataset gen_mislead_suite(const MisleadOptions& options) {
    if (options.order != 1 && options.order != 2) {
        throw InvalidParams("order must be 1 or 2");
    }
    if (options.trials < 0) {
        throw InvalidParams("trials must be >= 0");
    }
    std::vector<int> distances = options.distances;
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());

    Dataset ds;
    ds.manifest.suite = "mislead";
    ds.manifest.base_seed = options.base_seed;
    ds.manifest.engine_version = kEngineVersion;
    ds.manifest.grid = {
        {"order", std::to_string(options.order)},
        {"distances", join_ints(distances)},
        {"trials", std::to_string(options.trials)},
        {"environment", to_string(options.environment)},
        {"template_id", std::to_string(options.template_id)},
        {"num_characters", std::to_string(options.num_characters)},
        {"num_locations", std::to_string(options.num_locations)},
        {"horizon", std::to_string(options.horizon)},
    };

    for (int d : distances) {
        SuiteParams params{options.order, d, options.num_characters, options.num_locations,
                           options.horizon};
        for (int trial = 0; trial < options.trials; ++trial) {
            const std::string tag = "mislead|order=" + std::to_string(options.order) +
                                    "|d=" + std::to_string(d) +
                                    "|trial=" + std::to_string(trial);
            const Seed seed = derive_seed(options.base_seed, tag);
            BuiltBoard built = options.order == 1
                                   ? first_order_board(params, seed, options.environment)
                                   : second_order_board(params, seed, options.environment);
            Story story = simulate(built.board, seed);
            Question q{options.order == 1 ? QuestionKind::ToM1 : QuestionKind::ToM2,
                       built.roles};
            ds.records.push_back(make_record(
                "mislead-o" + std::to_string(options.order) + "-d" + pad(d, 3) + "-t" +
                    pad(trial, 4),
                "mislead", story, q, options.order, d, seed, options.horizon,
                options.template_id));
        }
    }
    ds.manifest.record_count = ds.records.size();
    return ds;
}

Dataset gen_tom_wm_triad(int trials, Seed base_seed) {
    if (trials < 0) {
        throw InvalidParams("trials must be >= 0");
    }
    constexpr int kDistance = 30;
    constexpr int kHorizon = 100;
    SuiteParams params{2, kDistance, 8, 6, kHorizon};

    Dataset ds;
    ds.manifest.suite = "triad";
    ds.manifest.base_seed = base_seed;
    ds.manifest.engine_version = kEngineVersion;
    ds.manifest.grid = {
        {"trials", std::to_string(trials)},
        {"mislead_distance", std::to_string(kDistance)},
        {"horizon", std::to_string(kHorizon)},
    };

    for (int trial = 0; trial < trials; ++trial) {
        const Seed seed = derive_seed(base_seed, "triad|trial=" + std::to_string(trial));
        BuiltBoard built = second_order_board(params, seed);
        Story story = simulate(built.board, seed);
        const std::string stem = "triad-t" + pad(trial, 4);

        Question tom2{QuestionKind::ToM2, built.roles};
        ds.records.push_back(make_record(stem + "-tom2", "triad", story, tom2, 2, kDistance,
                                         seed, kHorizon, 1));

        Question wm_human{QuestionKind::WM_Human, built.roles};
        ds.records.push_back(make_record(stem + "-wm_human", "triad", story, wm_human, 2,
                                         kDistance, seed, kHorizon, 1));

        InanimateStory inanimate =
            make_inanimate(built.board, story.events(), built.roles, seed);
        Story object_story(inanimate.board, seed, inanimate.events);
        Question wm_inanimate{QuestionKind::WM_Inanimate, inanimate.roles};
        ds.records.push_back(make_record(stem + "-wm_inanimate", "triad", object_story,
                                         wm_inanimate, 2, kDistance, seed, kHorizon, 1));
    }
    ds.manifest.record_count = ds.records.size();
    return ds;
}

Dataset gen_character_suite(const CharacterSuiteOptions& options) {
    if (options.trials < 0) {
        throw InvalidParams("trials must be >= 0");
    }
    if (options.kinds.empty()) {
        throw InvalidParams("at least one question kind is required");
    }
    for (QuestionKind kind : options.kinds) {
        if (kind != QuestionKind::ToM1 && kind != QuestionKind::WM_Human) {
            throw InvalidParams("character suite supports tom1 and wm_human questions");
        }
    }
    std::vector<int> counts = options.counts;
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    for (int count : counts) {
        if (count < 2) {
            throw InvalidParams("character count must be >= 2");
        }
        if (count > static_cast<int>(animate_name_pool().size())) {
            throw InvalidParams("character count " + std::to_string(count) +
                                " exceeds the name pool (" +
                                std::to_string(animate_name_pool().size()) + ")");
        }
    }

    std::vector<std::string> kind_names;
    for (QuestionKind kind : options.kinds) kind_names.push_back(to_string(kind));

    Dataset ds;
    ds.manifest.suite = "characters";
    ds.manifest.base_seed = options.base_seed;
    ds.manifest.engine_version = kEngineVersion;
    std::string kinds_joined;
    for (std::size_t i = 0; i < kind_names.size(); ++i) {
        if (i > 0) kinds_joined += ",";
        kinds_joined += kind_names[i];
    }
    ds.manifest.grid = {
        {"counts", join_ints(counts)},
        {"trials", std::to_string(options.trials)},
        {"kinds", kinds_joined},
        {"mislead_distance", std::to_string(options.mislead_distance)},
        {"horizon", std::to_string(options.horizon)},
        {"num_locations", std::to_string(options.num_locations)},
    };

    for (int count : counts) {
        SuiteParams params{1, options.mislead_distance, count, options.num_locations,
                           options.horizon};
        for (QuestionKind kind : options.kinds) {
            for (int trial = 0; trial < options.trials; ++trial) {
                const std::string tag = "characters|count=" + std::to_string(count) +
                                        "|kind=" + to_string(kind) +
                                        "|trial=" + std::to_string(trial);
                const Seed seed = derive_seed(options.base_seed, tag);
                BuiltBoard built = first_order_board(params, seed);
                Story story = simulate(built.board, seed);
                Question q{kind, built.roles};
                ds.records.push_back(make_record(
                    "chars-c" + pad(count, 3) + "-" + to_string(kind) + "-t" + pad(trial, 4),
                    "characters", story, q, 1, options.mislead_distance, seed,
                    options.horizon, options.template_id));
            }
        }
    }
    ds.manifest.record_count = ds.records.size();
    return ds;
}

Dataset gen_sally_anne(int trials) {
    if (trials < 0) {
        throw InvalidParams("trials must be >= 0");
    }
    Dataset ds;
    ds.manifest.suite = "sally_anne";
    ds.manifest.base_seed = 0;
    ds.manifest.engine_version = kEngineVersion;
    ds.manifest.grid = {{"trials", std::to_string(trials)}};

    SallyAnneBoard built = sally_anne_board();
    for (int trial = 0; trial < trials; ++trial) {
        Story story = simulate(built.board, 0);
        Question q{QuestionKind::ToM1, built.roles};
        ds.records.push_back(make_record("sally_anne-t" + pad(trial, 4), "sally_anne", story,
                                         q, 1, 0, 0, built.board.horizon, 1));
    }
    ds.manifest.record_count = ds.records.size();
    return ds;
}

namespace {

ordered_json event_to_json(const Event& e) {
    ordered_json j;
    j["t"] = e.t;
    j["actor"] = e.actor;
    j["action"] = e.action;
    j["location"] = e.location;
    return j;
}

Event event_from_json(const ordered_json& j) {
    return Event{j.at("t").get<int>(), j.at("actor").get<CharacterId>(),
                 j.at("action").get<ActionId>(), j.at("location").get<LocationId>()};
}

ordered_json manifest_to_json(const DatasetManifest& m) {
    ordered_json j;
    j["suite"] = m.suite;
    j["base_seed"] = m.base_seed;
    j["grid"] = m.grid;
    j["engine_version"] = m.engine_version;
    j["record_count"] = m.record_count;
    return j;
}

}  // namespace

std::string record_to_json_line(const QARecord& rec) {
    ordered_json j;
    j["id"] = rec.id;
    j["environment"] = to_string(rec.environment);
    ordered_json question;
    question["kind"] = to_string(rec.question.kind);
    ordered_json roles;
    roles["s1"] = rec.question.roles.s1;
    if (rec.question.roles.s2.has_value()) {
        roles["s2"] = *rec.question.roles.s2;
    } else {
        roles["s2"] = nullptr;
    }
    roles["target"] = rec.question.roles.target;
    question["roles"] = std::move(roles);
    j["question"] = std::move(question);
    j["order"] = rec.order;
    j["mislead_distance"] = rec.mislead_distance;
    j["seed"] = rec.seed;
    j["num_characters"] = rec.num_characters;
    j["num_locations"] = rec.num_locations;
    j["horizon"] = rec.horizon;
    ordered_json events = ordered_json::array();
    for (const auto& e : rec.events) events.push_back(event_to_json(e));
    j["events"] = std::move(events);
    j["story_text"] = rec.story_text;
    j["question_text"] = rec.question_text;
    j["prompt_template_id"] = rec.prompt_template_id;
    j["ground_truth"] = rec.ground_truth;
    ordered_json distractors;
    distractors["first_common_location"] = rec.distractors.first_common_location;
    distractors["true_final_location"] = rec.distractors.true_final_location;
    j["distractors"] = std::move(distractors);
    j["paraphrased"] = rec.paraphrased;
    j["meta"] = rec.meta;
    return j.dump();
}

QARecord record_from_json_line(const std::string& line, int line_number) {
    const std::string locus = "line " + std::to_string(line_number);
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), locus);
    }
    QARecord rec;
    try {
        rec.id = j.at("id").get<std::string>();
        rec.environment = environment_from_string(j.at("environment").get<std::string>());
        const auto& question = j.at("question");
        rec.question.kind = question_kind_from_string(question.at("kind").get<std::string>());
        const auto& roles = question.at("roles");
        rec.question.roles.s1 = roles.at("s1").get<CharacterId>();
        if (roles.contains("s2") && !roles.at("s2").is_null()) {
            rec.question.roles.s2 = roles.at("s2").get<CharacterId>();
        }
        rec.question.roles.target = roles.at("target").get<CharacterId>();
        rec.order = j.at("order").get<int>();
        rec.mislead_distance = j.at("mislead_distance").get<int>();
        rec.seed = j.at("seed").get<Seed>();
        rec.num_characters = j.at("num_characters").get<int>();
        rec.num_locations = j.at("num_locations").get<int>();
        rec.horizon = j.at("horizon").get<int>();
        for (const auto& e : j.at("events")) rec.events.push_back(event_from_json(e));
        rec.story_text = j.at("story_text").get<std::string>();
        rec.question_text = j.at("question_text").get<std::string>();
        rec.prompt_template_id = j.at("prompt_template_id").get<int>();
        rec.ground_truth = j.at("ground_truth").get<std::string>();
        const auto& distractors = j.at("distractors");
        rec.distractors.first_common_location =
            distractors.at("first_common_location").get<std::string>();
        rec.distractors.true_final_location =
            distractors.at("true_final_location").get<std::string>();
        rec.paraphrased = j.at("paraphrased").get<bool>();
        rec.meta = j.at("meta").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), locus);
    }
    return rec;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open dataset file for writing: " + path.string());
    }
    out << manifest_to_json(ds.manifest).dump() << "\n";
    for (const auto& rec : ds.records) {
        out << record_to_json_line(rec) << "\n";
    }
    if (!out) {
        throw IoError("failed writing dataset file: " + path.string());
    }
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dataset file: " + path.string());
    }
    Dataset ds;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("dataset file is empty", "line 1");
    }
    ordered_json m;
    try {
        m = ordered_json::parse(line);
        ds.manifest.suite = m.at("suite").get<std::string>();
        ds.manifest.base_seed = m.at("base_seed").get<Seed>();
        ds.manifest.grid = m.at("grid").get<std::map<std::string, std::string>>();
        ds.manifest.engine_version = m.at("engine_version").get<std::string>();
        ds.manifest.record_count = m.at("record_count").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what(), "line 1");
    }
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        ds.records.push_back(record_from_json_line(line, line_number));
    }
    if (ds.records.size() != ds.manifest.record_count) {
        throw ManifestMismatch("manifest claims " + std::to_string(ds.manifest.record_count) +
                               " records but the file holds " +
                               std::to_string(ds.records.size()));
    }
    return ds;
}

RebuiltBoard rebuild_board(const QARecord& rec) {
    auto suite_it = rec.meta.find("suite");
    if (suite_it == rec.meta.end()) {
        throw InvalidParams("record " + rec.id + " carries no suite tag; cannot rebuild");
    }
    const std::string& suite = suite_it->second;

    Storyboard board;
    RoleBinding roles;
    if (suite == "sally_anne") {
        SallyAnneBoard built = sally_anne_board();
        board = std::move(built.board);
        roles = built.roles;
    } else if (suite == "mislead" || suite == "characters" || suite == "triad") {
        SuiteParams params{rec.order, rec.mislead_distance, rec.num_characters,
                           rec.num_locations, rec.horizon};
        BuiltBoard built = rec.order == 1 ? first_order_board(params, rec.seed, rec.environment)
                                          : second_order_board(params, rec.seed, rec.environment);
        board = std::move(built.board);
        roles = built.roles;
        if (rec.question.kind == QuestionKind::WM_Human && !rec.question.roles.s2.has_value()) {
            roles.s2.reset();
        }
        if (rec.question.kind == QuestionKind::WM_Inanimate) {
            InanimateStory inanimate = make_inanimate(board, {}, roles, rec.seed);
            board = std::move(inanimate.board);
            roles = inanimate.roles;
        }
    } else {
        throw InvalidParams("unknown suite '" + suite + "' in record " + rec.id);
    }

    if (static_cast<int>(rec.events.size()) != board.horizon) {
        // The stored story was compressed; recover the compressed board by
        // replaying the deterministic simulation.
        board = simulate(board, rec.seed).board();
    }
    return RebuiltBoard{std::move(board), std::move(roles)};
}

std::string oracle_answer(const QARecord& rec) {
    RebuiltBoard rebuilt = rebuild_board(rec);
    Story story(rebuilt.board, rec.seed, rec.events);
    return answer_for(story, rec.question);
}

Distractors oracle_distractors(const QARecord& rec) {
    RebuiltBoard rebuilt = rebuild_board(rec);
    Story story(rebuilt.board, rec.seed, rec.events);
    return compute_distractors(story, rec.question);
}

void apply_paraphrase(Dataset& ds, TextTransformer& tx, const ParaphraseOptions& options) {
    for (auto& rec : ds.records) {
        RebuiltBoard rebuilt = rebuild_board(rec);
        Story story(rebuilt.board, rec.seed, rec.events);
        ParaphrasedStory paraphrased = paraphrase_story(story, tx, options);
        rec.meta["template_story_text"] = rec.story_text;
        rec.story_text = paraphrased.text();
        rec.paraphrased = true;
        std::string flagged;
        for (std::size_t i = 0; i < paraphrased.fallback.size(); ++i) {
            if (paraphrased.fallback[i]) {
                if (!flagged.empty()) flagged += ",";
                flagged += std::to_string(i + 1);
            }
        }
        if (!flagged.empty()) {
            rec.meta["paraphrase_fallback_lines"] = flagged;
        }
    }
}

}  // namespace tomsim
