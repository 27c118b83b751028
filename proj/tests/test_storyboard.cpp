#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "tomsim/storyboard.hpp"

using namespace tomsim;

namespace {

bool has_issue(const ValidationReport& report, BoardIssue code) {
    return std::any_of(report.begin(), report.end(),
                       [&](const ValidationIssue& i) { return i.code == code; });
}

std::vector<int> pinned_times(const Storyboard& sb) {
    std::vector<int> out;
    for (const auto& spec : sb.event_specs) {
        if (const auto* m = std::get_if<MoveAt>(&spec)) out.push_back(m->t);
        if (const auto* x = std::get_if<CrossPaths>(&spec)) out.push_back(x->t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("experimental first-order board validates cleanly") {
    SuiteParams params{1, 30, 8, 6, 100};
    BuiltBoard built = first_order_board(params, 7);
    CHECK(validate_storyboard(built.board).empty());
    CHECK(built.board.characters.size() == 8);
    CHECK(built.board.graph.vertices.size() == 6);
    CHECK(built.board.horizon == 100);
    // Complete digraph on 6 vertices.
    CHECK(built.board.graph.edges.size() == 30);
}

TEST_CASE("pinned move at t=0 is out of range") {
    SuiteParams params{1, 5, 8, 6, 100};
    Storyboard sb = first_order_board(params, 3).board;
    sb.event_specs.push_back(MoveAt{sb.characters[0], sb.graph.vertices[1], 0});
    CHECK(has_issue(validate_storyboard(sb), BoardIssue::TIMESTEP_OUT_OF_RANGE));
}

TEST_CASE("two pins on one timestep clash") {
    Storyboard sb = first_order_board(SuiteParams{1, 5, 8, 6, 100}, 3).board;
    sb.event_specs.push_back(MoveAt{sb.characters[0], sb.graph.vertices[1], 11});
    CHECK(has_issue(validate_storyboard(sb), BoardIssue::PINNED_CLASH));
}

TEST_CASE("window covering a protected pin is a conflict") {
    Storyboard sb;
    sb.characters = {"Alice", "Bob"};
    sb.actions = {"enters"};
    sb.graph = LocationGraph::complete({"the_hallway", "room_1", "room_2"}, "the_hallway");
    sb.horizon = 20;
    sb.event_specs = {
        MoveAt{"Alice", "room_1", 15},
        ExclusiveRandom{{"Alice"}, 10, 18},
    };
    CHECK(has_issue(validate_storyboard(sb), BoardIssue::WINDOW_PIN_CONFLICT));
}

TEST_CASE("referential and graph issues are reported") {
    Storyboard sb;
    sb.characters = {"Alice", "Alice"};
    sb.actions = {"enters"};
    sb.graph.vertices = {"the_hallway", "room_1", "island"};
    sb.graph.start_vertex = "the_hallway";
    sb.graph.edges = {{"the_hallway", "room_1"},
                      {"room_1", "the_hallway"},
                      {"room_1", "room_1"}};
    sb.horizon = 0;
    sb.event_specs = {MoveAt{"Ghost", "nowhere", 1},
                      CrossPaths{{"Alice"}, "room_1", 2},
                      ExclusiveRandom{{"Alice"}, 5, 3}};
    ValidationReport report = validate_storyboard(sb);
    CHECK(has_issue(report, BoardIssue::DUPLICATE_CHARACTER));
    CHECK(has_issue(report, BoardIssue::NONPOSITIVE_HORIZON));
    CHECK(has_issue(report, BoardIssue::SELF_LOOP_EDGE));
    CHECK(has_issue(report, BoardIssue::UNREACHABLE_VERTEX));
    CHECK(has_issue(report, BoardIssue::UNKNOWN_CHARACTER));
    CHECK(has_issue(report, BoardIssue::UNKNOWN_LOCATION));
    CHECK(has_issue(report, BoardIssue::CROSS_PATHS_TOO_FEW));
    CHECK(has_issue(report, BoardIssue::WINDOW_OUT_OF_RANGE));
}

TEST_CASE("first-order pattern pins land at 10, 11, and 12+d") {
    BuiltBoard built = first_order_board(SuiteParams{1, 30, 8, 6, 100}, 7);
    CHECK(pinned_times(built.board) == std::vector<int>{10, 11, 42});

    // Repeatable: equal inputs give structurally equal outputs.
    BuiltBoard again = first_order_board(SuiteParams{1, 30, 8, 6, 100}, 7);
    CHECK(built.board == again.board);
    CHECK(built.roles == again.roles);

    // Distinct non-start key locations.
    std::set<LocationId> keys{built.expected.first_common, built.expected.believed,
                              built.expected.actual_final};
    CHECK(keys.size() == 3);
    CHECK(keys.count(built.board.graph.start_vertex) == 0);
}

TEST_CASE("first-order boundary distances") {
    BuiltBoard built = first_order_board(SuiteParams{1, 0, 8, 6, 13}, 5);
    CHECK(pinned_times(built.board) == std::vector<int>{10, 11, 12});
    CHECK(validate_storyboard(built.board).empty());

    CHECK_THROWS_AS(first_order_board(SuiteParams{1, 1, 8, 6, 12}, 5), InvalidParams);
    CHECK_THROWS_AS(first_order_board(SuiteParams{2, 1, 8, 6, 100}, 5), InvalidParams);
}

TEST_CASE("second-order pattern and boundaries") {
    BuiltBoard built = second_order_board(SuiteParams{2, 30, 8, 6, 100}, 11);
    CHECK(pinned_times(built.board) == std::vector<int>{10, 11, 42, 43});
    CHECK(validate_storyboard(built.board).empty());
    CHECK(built.roles.s2.has_value());
    CHECK(built.roles.s1 != built.roles.target);
    CHECK(built.roles.s1 != *built.roles.s2);
    CHECK(*built.roles.s2 != built.roles.target);

    // d=0 still yields a valid board with the second meeting pinned at 12.
    BuiltBoard tight = second_order_board(SuiteParams{2, 0, 8, 6, 14}, 11);
    CHECK(validate_storyboard(tight.board).empty());
    bool found = false;
    for (const auto& spec : tight.board.event_specs) {
        if (const auto* x = std::get_if<CrossPaths>(&spec)) {
            if (x->t == 12) {
                found = true;
                CHECK(x->characters.size() == 2);
            }
        }
    }
    CHECK(found);

    CHECK_THROWS_AS(second_order_board(SuiteParams{2, 90, 8, 6, 100}, 11), InvalidParams);
}

TEST_CASE("builders validate cleanly across seeds and distances") {
    for (int d : {0, 1, 2, 30, 80}) {
        for (Seed seed = 0; seed < 10; ++seed) {
            BuiltBoard fo = first_order_board(SuiteParams{1, d, 8, 6, 100}, seed);
            CHECK(validate_storyboard(fo.board).empty());
            if (13 + d <= 100) {
                BuiltBoard so = second_order_board(SuiteParams{2, d, 8, 6, 100}, seed);
                CHECK(validate_storyboard(so.board).empty());
            }
        }
    }
}

TEST_CASE("sally-anne board shape") {
    SallyAnneBoard built = sally_anne_board();
    CHECK(built.board.horizon == 5);
    CHECK(built.board.characters.size() == 2);
    CHECK(built.board.graph.vertices.size() == 3);
    CHECK(validate_storyboard(built.board).empty());
}

TEST_CASE("board files round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "tomsim_board_test.json";
    BuiltBoard built = first_order_board(SuiteParams{1, 12, 8, 6, 100}, 21);
    save_board(built.board, path);
    Storyboard loaded = load_board(path);
    CHECK(loaded == built.board);
    std::filesystem::remove(path);
}

TEST_CASE("unknown environment tag names the field") {
    Storyboard sb = sally_anne_board().board;
    std::string text = board_to_json(sb);
    const auto pos = text.find("hallways_doors");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("hallways_doors").size(), "outer_space");
    try {
        board_from_json(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("environment") != std::string::npos);
    }
}

TEST_CASE("loading a board with a foreign character fails validation") {
    const auto path = std::filesystem::temp_directory_path() / "tomsim_bad_board.json";
    Storyboard sb = sally_anne_board().board;
    sb.event_specs.push_back(MoveAt{"Rumpelstiltskin", "room_1", 3});
    {
        std::ofstream out(path);
        out << board_to_json(sb);
    }
    CHECK_THROWS_AS(load_board(path), ValidationError);
    std::filesystem::remove(path);
}
