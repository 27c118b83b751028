#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tomsim/names.hpp"
#include "tomsim/suites.hpp"

using namespace tomsim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void check_record_integrity(const QARecord& rec) {
    RebuiltBoard rebuilt = rebuild_board(rec);
    Story story(rebuilt.board, rec.seed, rec.events);
    CHECK(check_constraints(story, rebuilt.board).empty());
    CHECK(oracle_answer(rec) == rec.ground_truth);
    CHECK(oracle_distractors(rec) == rec.distractors);
    CHECK(rec.distractors.first_common_location != rec.ground_truth);
}

}  // namespace

TEST_CASE("mislead suite covers its grid with sound records") {
    MisleadOptions options;
    options.order = 1;
    options.distances = {1, 30};
    options.trials = 3;
    options.base_seed = 7;
    Dataset ds = gen_mislead_suite(options);
    REQUIRE(ds.records.size() == 6);
    CHECK(ds.manifest.suite == "mislead");
    CHECK(ds.manifest.record_count == 6);

    std::set<std::string> ids;
    std::map<int, int> per_distance;
    for (const auto& rec : ds.records) {
        ids.insert(rec.id);
        per_distance[rec.mislead_distance] += 1;
        CHECK(rec.horizon == 100);
        CHECK(rec.num_characters == 8);
        CHECK(rec.num_locations == 6);
        CHECK(rec.question.kind == QuestionKind::ToM1);
        CHECK(static_cast<int>(rec.events.size()) == 100);
        check_record_integrity(rec);
    }
    CHECK(ids.size() == 6);
    CHECK(per_distance[1] == 3);
    CHECK(per_distance[30] == 3);
}

TEST_CASE("second-order mislead records answer with the witnessed move") {
    MisleadOptions options;
    options.order = 2;
    options.distances = {30};
    options.trials = 3;
    options.base_seed = 11;
    Dataset ds = gen_mislead_suite(options);
    REQUIRE(ds.records.size() == 3);
    for (const auto& rec : ds.records) {
        CHECK(rec.question.kind == QuestionKind::ToM2);
        CHECK(rec.question.roles.s2.has_value());
        check_record_integrity(rec);
    }
}

TEST_CASE("an empty mislead suite still carries its manifest") {
    MisleadOptions options;
    options.distances = {10};
    options.trials = 0;
    Dataset ds = gen_mislead_suite(options);
    CHECK(ds.records.empty());
    CHECK(ds.manifest.record_count == 0);
    CHECK(ds.manifest.grid.at("distances") == "10");
}

TEST_CASE("suite generation is deterministic") {
    MisleadOptions options;
    options.order = 1;
    options.distances = {20};
    options.trials = 2;
    options.base_seed = 3;
    Dataset a = gen_mislead_suite(options);
    Dataset b = gen_mislead_suite(options);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(record_to_json_line(a.records[i]) == record_to_json_line(b.records[i]));
    }
}

TEST_CASE("triads share a story and agree between tom2 and wm") {
    Dataset ds = gen_tom_wm_triad(2, 5);
    REQUIRE(ds.records.size() == 6);
    for (std::size_t i = 0; i < ds.records.size(); i += 3) {
        const QARecord& tom2 = ds.records[i];
        const QARecord& wm_human = ds.records[i + 1];
        const QARecord& wm_object = ds.records[i + 2];
        CHECK(tom2.question.kind == QuestionKind::ToM2);
        CHECK(wm_human.question.kind == QuestionKind::WM_Human);
        CHECK(wm_object.question.kind == QuestionKind::WM_Inanimate);
        CHECK(tom2.ground_truth == wm_human.ground_truth);
        CHECK(tom2.events == wm_human.events);
        CHECK(tom2.story_text == wm_human.story_text);

        // The object variant keeps the skeleton but swaps every entity.
        REQUIRE(wm_object.events.size() == tom2.events.size());
        for (std::size_t k = 0; k < wm_object.events.size(); ++k) {
            CHECK(wm_object.events[k].location == tom2.events[k].location);
            CHECK(wm_object.events[k].action == "is_moved");
        }
        for (const auto& e : tom2.events) {
            CHECK(wm_object.story_text.find(e.actor) == std::string::npos);
        }
        CHECK(wm_object.ground_truth == tom2.ground_truth);

        check_record_integrity(tom2);
        check_record_integrity(wm_human);
        check_record_integrity(wm_object);
    }

    Dataset again = gen_tom_wm_triad(1, 5);
    CHECK(again.records[0].id == ds.records[0].id);
}

TEST_CASE("character suite spans counts and kinds") {
    CharacterSuiteOptions options;
    options.counts = {2, 8};
    options.trials = 2;
    options.base_seed = 9;
    Dataset ds = gen_character_suite(options);
    REQUIRE(ds.records.size() == 8);  // 2 counts x 2 kinds x 2 trials
    int compressed = 0;
    for (const auto& rec : ds.records) {
        CHECK(rec.horizon == 100);
        if (rec.meta.count("effective_horizon")) {
            ++compressed;
            CHECK(static_cast<int>(rec.events.size()) < 100);
            CHECK(rec.num_characters == 2);
        } else {
            CHECK(static_cast<int>(rec.events.size()) == 100);
        }
        if (rec.question.kind == QuestionKind::WM_Human) {
            CHECK(!rec.question.roles.s2.has_value());
        }
        check_record_integrity(rec);
    }
    CHECK(compressed == 4);  // every 2-character story compresses

    CharacterSuiteOptions bad = options;
    bad.counts = {static_cast<int>(animate_name_pool().size()) + 1};
    CHECK_THROWS_AS(gen_character_suite(bad), InvalidParams);
    bad.counts = {1};
    CHECK_THROWS_AS(gen_character_suite(bad), InvalidParams);
}

TEST_CASE("sally-anne records are identical in structure") {
    Dataset ds = gen_sally_anne(3);
    REQUIRE(ds.records.size() == 3);
    for (const auto& rec : ds.records) {
        CHECK(rec.horizon == 5);
        CHECK(rec.events.size() == 5);
        CHECK(rec.question.kind == QuestionKind::ToM1);
        CHECK(rec.ground_truth == "room_2");
        CHECK(rec.distractors.true_final_location == "room_1");
        check_record_integrity(rec);
    }
    CHECK(ds.records[0].events == ds.records[1].events);
    Dataset again = gen_sally_anne(3);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(again.records[i].id == ds.records[i].id);
    }
}

TEST_CASE("datasets round-trip through their file format") {
    MisleadOptions options;
    options.distances = {15};
    options.trials = 2;
    options.base_seed = 21;
    Dataset ds = gen_mislead_suite(options);
    const auto path = temp_file("tomsim_roundtrip.jsonl");
    write_dataset(ds, path);
    Dataset loaded = read_dataset(path);
    CHECK(loaded.manifest.suite == ds.manifest.suite);
    CHECK(loaded.manifest.record_count == ds.manifest.record_count);
    CHECK(loaded.manifest.grid == ds.manifest.grid);
    REQUIRE(loaded.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(record_to_json_line(loaded.records[i]) == record_to_json_line(ds.records[i]));
    }

    // Writing the loaded dataset again is byte-identical.
    const auto path2 = temp_file("tomsim_roundtrip2.jsonl");
    write_dataset(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("a truncated dataset reports the broken line") {
    MisleadOptions options;
    options.distances = {15};
    options.trials = 2;
    options.base_seed = 21;
    Dataset ds = gen_mislead_suite(options);
    const auto path = temp_file("tomsim_truncated.jsonl");
    write_dataset(ds, path);
    std::string text = slurp(path);
    text.resize(text.size() / 2);  // cut mid-record
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
    }
    try {
        read_dataset(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("a manifest that disagrees with the record count is rejected") {
    Dataset ds = gen_sally_anne(2);
    ds.manifest.record_count = 10;
    const auto path = temp_file("tomsim_manifest.jsonl");
    write_dataset(ds, path);
    CHECK_THROWS_AS(read_dataset(path), ManifestMismatch);
    std::filesystem::remove(path);
}

TEST_CASE("rebuild_board replays the exact stored story") {
    MisleadOptions options;
    options.order = 2;
    options.distances = {12};
    options.trials = 1;
    options.base_seed = 31;
    Dataset ds = gen_mislead_suite(options);
    const QARecord& rec = ds.records[0];
    RebuiltBoard rebuilt = rebuild_board(rec);
    Story replay = simulate(rebuilt.board, rec.seed);
    CHECK(replay.events() == rec.events);
}

TEST_CASE("paraphrasing a dataset keeps the template text on the side") {
    Dataset ds = gen_sally_anne(1);
    IdentityTransformer identity;
    apply_paraphrase(ds, identity);
    const QARecord& rec = ds.records[0];
    CHECK(rec.paraphrased);
    CHECK(rec.meta.at("template_story_text") == rec.story_text);
    CHECK(rec.meta.count("paraphrase_fallback_lines") == 0);
}
