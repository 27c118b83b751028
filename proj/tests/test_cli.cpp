#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

std::string cli_path() {
    const char* path = std::getenv("TOMSIM_CLI");
    REQUIRE_MESSAGE(path != nullptr, "TOMSIM_CLI must point at the built binary");
    return path;
}

CliResult run_cli(const std::string& args) {
    const std::string command = cli_path() + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    CliResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) {
        result.output.append(buffer.data(), n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "tomsim_cli_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

}  // namespace

TEST_CASE("help lists the subcommands") {
    CliResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    for (const char* name : {"generate", "run", "score", "report", "validate"}) {
        CHECK(help.output.find(name) != std::string::npos);
    }
}

TEST_CASE("every command's help enumerates its flags") {
    const std::map<std::string, std::vector<std::string>> flags = {
        {"generate",
         {"--suite", "--order", "--distances", "--trials", "--seed", "--env",
          "--template-id", "--counts", "--kinds", "--horizon", "--num-characters",
          "--num-locations", "--mislead-distance", "--paraphrase", "--transformer",
          "--out"}},
        {"run", {"--data", "--bot", "--endpoint", "--out", "--concurrency", "--resume"}},
        {"score", {"--data", "--responses", "--out"}},
        {"report", {"--data", "--responses", "--group-by", "--out", "--normal-ci"}},
        {"validate", {"--data", "--board", "--strict"}},
    };
    for (const auto& [command, expected] : flags) {
        CliResult help = run_cli(command + " --help");
        CHECK(help.exit_code == 0);
        for (const auto& flag : expected) {
            CHECK_MESSAGE(help.output.find(flag) != std::string::npos,
                          command << " --help lacks " << flag);
        }
    }
}

TEST_CASE("unknown flags exit 2") {
    CHECK(run_cli("generate --suite sally-anne --no-such-flag").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CliResult missing = run_cli("run --bot oracle --out /tmp/x.jsonl");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("--data") != std::string::npos);
}

TEST_CASE("a second-order pattern beyond the horizon exits 2") {
    CliResult result = run_cli("generate --suite mislead --order 2 --distances 95 --trials 1"
                               " --out " + (temp_dir() / "never.jsonl").string());
    CHECK(result.exit_code == 2);
}

TEST_CASE("generate, run, score, and report round a full pipeline") {
    const fs::path data = temp_dir() / "pipe_data.jsonl";
    const fs::path responses = temp_dir() / "pipe_responses.jsonl";
    const fs::path scored = temp_dir() / "pipe_scored.jsonl";
    const fs::path report = temp_dir() / "pipe_report.csv";

    CliResult gen = run_cli("generate --suite mislead --order 1 --distances 1,20 --trials 3"
                            " --seed 9 --out " + data.string());
    CHECK(gen.exit_code == 0);
    CHECK(gen.output.find("wrote 6 records") != std::string::npos);

    CliResult validate = run_cli("validate --data " + data.string() + " --strict");
    CHECK(validate.exit_code == 0);
    CHECK(validate.output.find("6 of 6 stories satisfy the Storyboard") != std::string::npos);

    CliResult run = run_cli("run --data " + data.string() + " --bot oracle --out " +
                            responses.string());
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("wrote 6 responses") != std::string::npos);

    CliResult score = run_cli("score --data " + data.string() + " --responses " +
                              responses.string() + " --out " + scored.string());
    CHECK(score.exit_code == 0);

    CliResult rep = run_cli("report --data " + data.string() + " --responses " +
                            responses.string() + " --out " + report.string());
    CHECK(rep.exit_code == 0);
    const std::string csv = slurp(report);
    CHECK(csv.find("tom1,1,3,3,1.000000,") != std::string::npos);
    CHECK(csv.find("tom1,20,3,3,1.000000,") != std::string::npos);
}

TEST_CASE("sally-anne generation matches the published shape") {
    const fs::path data = temp_dir() / "sally.jsonl";
    CliResult gen = run_cli("generate --suite sally-anne --trials 1 --out " + data.string());
    CHECK(gen.exit_code == 0);
    CHECK(gen.output.find("wrote 1 records") != std::string::npos);
    const std::string text = slurp(data);
    CHECK(text.find("\"horizon\":5") != std::string::npos);
}

TEST_CASE("validate flags a corrupted pinned event") {
    const fs::path data = temp_dir() / "corrupt.jsonl";
    CliResult gen = run_cli("generate --suite mislead --order 1 --distances 10 --trials 2"
                            " --seed 4 --out " + data.string());
    REQUIRE(gen.exit_code == 0);

    // Swap the actor of the t=11 pinned move in the first record.
    std::ifstream in(data);
    std::string manifest_line, rec1, rec2;
    std::getline(in, manifest_line);
    std::getline(in, rec1);
    std::getline(in, rec2);
    in.close();

    // Redirect the pinned t=11 move to the hallway; the builder never pins
    // a key location there, so the pinned move is no longer realized.
    const std::string needle = "{\"t\":11,\"actor\":\"";
    const auto pos = rec1.find(needle);
    REQUIRE(pos != std::string::npos);
    const std::string loc_key = "\"location\":\"";
    const auto loc_start = rec1.find(loc_key, pos) + loc_key.size();
    const auto loc_end = rec1.find('"', loc_start);
    rec1.replace(loc_start, loc_end - loc_start, "the_hallway");

    std::ofstream out(data, std::ios::trunc);
    out << manifest_line << "\n" << rec1 << "\n" << rec2 << "\n";
    out.close();

    CliResult loose = run_cli("validate --data " + data.string());
    CHECK(loose.exit_code == 0);
    CHECK(loose.output.find("1 of 2 stories satisfy the Storyboard") != std::string::npos);

    CliResult strict = run_cli("validate --data " + data.string() + " --strict");
    CHECK(strict.exit_code == 5);
}

TEST_CASE("an empty dataset validates as 0 of 0") {
    const fs::path data = temp_dir() / "empty.jsonl";
    CliResult gen = run_cli("generate --suite sally-anne --trials 0 --out " + data.string());
    REQUIRE(gen.exit_code == 0);
    CliResult validate = run_cli("validate --data " + data.string());
    CHECK(validate.exit_code == 0);
    CHECK(validate.output.find("0 of 0") != std::string::npos);
}

TEST_CASE("validate accepts a board file") {
    const char* data_dir = std::getenv("TOMSIM_DATA_DIR");
    REQUIRE(data_dir != nullptr);
    const fs::path board = fs::path(data_dir) / "boards" / "sally_anne.json";
    CliResult ok = run_cli("validate --board " + board.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("board is valid") != std::string::npos);

    // A board with clashing pins is reported and fails under --strict.
    const fs::path bad = temp_dir() / "bad_board.json";
    std::string text = slurp(board);
    const auto pos = text.find("\"t\": 2");
    REQUIRE(pos != std::string::npos);
    std::string mutated = text;
    mutated.replace(pos, 6, "\"t\": 1");
    {
        std::ofstream out(bad, std::ios::trunc);
        out << mutated;
    }
    CliResult loose = run_cli("validate --board " + bad.string());
    CHECK(loose.exit_code == 0);
    CHECK(loose.output.find("PINNED_CLASH") != std::string::npos);
    CHECK(run_cli("validate --board " + bad.string() + " --strict").exit_code == 5);
}

TEST_CASE("score exits 5 on duplicated responses") {
    const fs::path data = temp_dir() / "dup_data.jsonl";
    const fs::path responses = temp_dir() / "dup_responses.jsonl";
    REQUIRE(run_cli("generate --suite sally-anne --trials 1 --out " + data.string())
                .exit_code == 0);
    REQUIRE(run_cli("run --data " + data.string() + " --bot oracle --out " +
                    responses.string())
                .exit_code == 0);
    // Duplicate the single response line.
    std::string line = slurp(responses);
    std::ofstream out(responses, std::ios::app);
    out << line;
    out.close();
    CliResult score = run_cli("score --data " + data.string() + " --responses " +
                              responses.string() + " --out " + (temp_dir() / "x.jsonl").string());
    CHECK(score.exit_code == 5);
}

TEST_CASE("paraphrased generation keeps the identity text") {
    const fs::path data = temp_dir() / "para.jsonl";
    CliResult gen = run_cli("generate --suite sally-anne --trials 1 --paraphrase --out " +
                            data.string());
    CHECK(gen.exit_code == 0);
    const std::string text = slurp(data);
    CHECK(text.find("\"paraphrased\":true") != std::string::npos);
    CHECK(text.find("template_story_text") != std::string::npos);
}
