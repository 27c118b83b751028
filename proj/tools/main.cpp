// tomsim command line: generate datasets, run models or bots over them,
// score the responses, and report aggregate tables.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tomsim/epistemics.hpp"
#include "tomsim/errors.hpp"
#include "tomsim/eval.hpp"
#include "tomsim/modelgw.hpp"
#include "tomsim/render.hpp"
#include "tomsim/simulator.hpp"
#include "tomsim/storyboard.hpp"
#include "tomsim/suites.hpp"
#include "tomsim/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadParams = 2;
constexpr int kExitIoFailure = 3;
constexpr int kExitAuthFailure = 4;
constexpr int kExitMismatch = 5;

struct GenerateArgs {
    std::string suite;
    int order = 1;
    std::vector<int> distances;
    int trials = 100;
    std::uint64_t seed = 0;
    std::string environment = "hallways_doors";
    int template_id = 1;
    std::vector<int> counts{8, 16, 32, 64};
    std::vector<std::string> kinds{"tom1", "wm_human"};
    int horizon = 100;
    int num_characters = 8;
    int num_locations = 6;
    int mislead_distance = 30;
    bool paraphrase = false;
    std::string transformer = "identity";
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    tomsim::Dataset ds;
    if (args.suite == "mislead") {
        tomsim::MisleadOptions options;
        options.order = args.order;
        options.distances = args.distances;
        if (options.distances.empty()) {
            std::cerr << "generate: --distances is required for the mislead suite\n";
            return kExitBadParams;
        }
        options.trials = args.trials;
        options.base_seed = args.seed;
        options.environment = tomsim::environment_from_string(args.environment);
        options.template_id = args.template_id;
        options.num_characters = args.num_characters;
        options.num_locations = args.num_locations;
        options.horizon = args.horizon;
        ds = tomsim::gen_mislead_suite(options);
    } else if (args.suite == "triad") {
        ds = tomsim::gen_tom_wm_triad(args.trials, args.seed);
    } else if (args.suite == "characters") {
        tomsim::CharacterSuiteOptions options;
        options.counts = args.counts;
        options.trials = args.trials;
        options.base_seed = args.seed;
        options.kinds.clear();
        for (const auto& kind : args.kinds) {
            options.kinds.push_back(tomsim::question_kind_from_string(kind));
        }
        options.mislead_distance = args.mislead_distance;
        options.num_locations = args.num_locations;
        options.horizon = args.horizon;
        options.template_id = args.template_id;
        ds = tomsim::gen_character_suite(options);
    } else if (args.suite == "sally-anne" || args.suite == "sally_anne") {
        ds = tomsim::gen_sally_anne(args.trials);
    } else {
        std::cerr << "generate: unknown suite '" << args.suite << "'\n";
        return kExitBadParams;
    }

    if (args.paraphrase) {
        auto transformer = tomsim::load_transformer(args.transformer);
        tomsim::apply_paraphrase(ds, *transformer);
    }

    tomsim::write_dataset(ds, args.out);
    std::cout << "wrote " << ds.records.size() << " records to " << args.out << "\n";
    std::cout << "suite=" << ds.manifest.suite << " base_seed=" << ds.manifest.base_seed
              << " engine=" << ds.manifest.engine_version << "\n";
    for (const auto& [key, value] : ds.manifest.grid) {
        std::cout << "  " << key << "=" << value << "\n";
    }
    return kExitOk;
}

struct RunArgs {
    std::string data;
    std::string bot;
    std::string endpoint;
    std::string out;
    int concurrency = 1;
    bool resume = false;
};

int cmd_run(const RunArgs& args) {
    if (args.bot.empty() == args.endpoint.empty()) {
        std::cerr << "run: exactly one of --bot or --endpoint is required\n";
        return kExitBadParams;
    }
    tomsim::Dataset ds = tomsim::read_dataset(args.data);

    tomsim::Responder responder;
    int concurrency = args.concurrency;
    if (!args.bot.empty()) {
        responder = tomsim::make_bot(tomsim::bot_kind_from_string(args.bot));
    } else {
        tomsim::EndpointConfig cfg = tomsim::load_endpoint_config(args.endpoint);
        concurrency = std::min(concurrency, cfg.max_in_flight);
        responder = tomsim::make_endpoint_responder(cfg, tomsim::make_httplib_transport());
    }

    tomsim::RunOptions options;
    options.concurrency = concurrency;
    options.log_path = std::filesystem::path(args.out);
    options.resume = args.resume;
    auto responses = tomsim::run_dataset(responder, ds, options);
    std::cout << "wrote " << responses.size() << " responses to " << args.out << "\n";
    return kExitOk;
}

struct ScoreArgs {
    std::string data;
    std::string responses;
    std::string out;
};

int cmd_score(const ScoreArgs& args) {
    tomsim::Dataset ds = tomsim::read_dataset(args.data);
    auto responses = tomsim::read_responses(args.responses);
    tomsim::ScoreOutput scored = tomsim::score_dataset(ds, responses);
    tomsim::write_scored(scored.results, args.out);
    std::cout << "scored " << scored.results.size() << " responses ("
              << scored.missing_ids.size() << " records missing) to " << args.out << "\n";
    return kExitOk;
}

struct ReportArgs {
    std::string data;
    std::string responses;
    std::string group_by = "kind,mislead_distance";
    std::string out;
    bool normal_ci = false;
};

int cmd_report(const ReportArgs& args) {
    tomsim::Dataset ds = tomsim::read_dataset(args.data);
    auto responses = tomsim::read_responses(args.responses);
    tomsim::ScoreOutput scored = tomsim::score_dataset(ds, responses);

    std::vector<std::string> fields;
    std::string current;
    for (char c : args.group_by) {
        if (c == ',') {
            if (!current.empty()) fields.push_back(current);
            current.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            current += c;
        }
    }
    if (!current.empty()) fields.push_back(current);

    auto rows = tomsim::aggregate(scored.results, fields, args.normal_ci);
    tomsim::write_report(rows, fields, args.out);
    std::cout << "wrote " << rows.size() << " aggregate rows to " << args.out << "\n";
    return kExitOk;
}

struct ValidateArgs {
    std::string data;
    std::string board;
    bool strict = false;
};

int cmd_validate(const ValidateArgs& args) {
    if (args.data.empty() == args.board.empty()) {
        std::cerr << "validate: exactly one of --data or --board is required\n";
        return kExitBadParams;
    }

    if (!args.board.empty()) {
        std::ifstream in(args.board, std::ios::binary);
        if (!in) {
            std::cerr << "validate: cannot open " << args.board << "\n";
            return kExitIoFailure;
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        tomsim::Storyboard sb = tomsim::board_from_json(buffer.str());
        tomsim::ValidationReport report = tomsim::validate_storyboard(sb);
        if (report.empty()) {
            std::cout << "board is valid\n";
            return kExitOk;
        }
        for (const auto& issue : report) {
            std::cout << tomsim::to_string(issue.code);
            if (issue.spec_index >= 0) std::cout << " (spec " << issue.spec_index << ")";
            std::cout << ": " << issue.detail << "\n";
        }
        return args.strict ? kExitMismatch : kExitOk;
    }

    tomsim::Dataset ds = tomsim::read_dataset(args.data);
    std::size_t adherent = 0;
    for (const auto& rec : ds.records) {
        bool ok = true;
        try {
            tomsim::RebuiltBoard rebuilt = tomsim::rebuild_board(rec);
            tomsim::Story story(rebuilt.board, rec.seed, rec.events);
            tomsim::ViolationList violations = tomsim::check_constraints(story, rebuilt.board);
            if (!violations.empty()) {
                ok = false;
                for (const auto& v : violations.items) {
                    std::cout << rec.id << ": " << tomsim::to_string(v.code) << " at t="
                              << v.timestep << " (" << v.detail << ")\n";
                }
            } else if (tomsim::oracle_answer(rec) != rec.ground_truth) {
                ok = false;
                std::cout << rec.id << ": stored ground truth does not match the oracle\n";
            } else {
                tomsim::Distractors expected = tomsim::oracle_distractors(rec);
                if (!(expected == rec.distractors)) {
                    ok = false;
                    std::cout << rec.id << ": stored distractors do not match the oracle\n";
                }
            }
        } catch (const tomsim::Error& e) {
            ok = false;
            std::cout << rec.id << ": " << e.what() << "\n";
        }
        if (ok) ++adherent;
    }
    std::cout << adherent << " of " << ds.records.size()
              << " stories satisfy the Storyboard\n";
    if (args.strict && adherent != ds.records.size()) {
        return kExitMismatch;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic theory-of-mind story engine and evaluation harness"};
    app.set_version_flag("--version", tomsim::kEngineVersion);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a question-answer dataset");
    generate->add_option("--suite", gen.suite, "mislead | triad | characters | sally-anne")
        ->required();
    generate->add_option("--order", gen.order, "ToM order for the mislead suite (1|2)");
    generate->add_option("--distances", gen.distances, "Mislead distances")->delimiter(',');
    generate->add_option("--trials", gen.trials, "Records per grid cell");
    generate->add_option("--seed", gen.seed, "Base seed");
    generate->add_option("--env", gen.environment,
                         "hallways_doors | holes_field | conference_call");
    generate->add_option("--template-id", gen.template_id, "Prompt template id (1..12)");
    generate->add_option("--counts", gen.counts, "Character counts (characters suite)")
        ->delimiter(',');
    generate->add_option("--kinds", gen.kinds, "Question kinds (characters suite)")
        ->delimiter(',');
    generate->add_option("--horizon", gen.horizon, "Story length");
    generate->add_option("--num-characters", gen.num_characters,
                         "Character count (mislead suite)");
    generate->add_option("--num-locations", gen.num_locations, "Location count");
    generate->add_option("--mislead-distance", gen.mislead_distance,
                         "Mislead distance (characters suite)");
    generate->add_flag("--paraphrase", gen.paraphrase, "Paraphrase story sentences");
    generate->add_option("--transformer", gen.transformer,
                         "Paraphrase transformer: 'identity' or a config file");
    generate->add_option("--out", gen.out, "Output dataset path")->required();

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Obtain responses from a bot or endpoint");
    run_cmd->add_option("--data", run.data, "Dataset path")->required();
    run_cmd->add_option("--bot", run.bot,
                        "oracle | last_location | first_common_location | refusal | truncator");
    run_cmd->add_option("--endpoint", run.endpoint, "Endpoint config file");
    run_cmd->add_option("--out", run.out, "Responses output path")->required();
    run_cmd->add_option("--concurrency", run.concurrency, "Max requests in flight");
    run_cmd->add_flag("--resume", run.resume, "Skip record ids already in the output file");

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Label responses against ground truth");
    score_cmd->add_option("--data", score.data, "Dataset path")->required();
    score_cmd->add_option("--responses", score.responses, "Responses path")->required();
    score_cmd->add_option("--out", score.out, "Scored results output path")->required();

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Aggregate accuracy tables");
    report_cmd->add_option("--data", report.data, "Dataset path")->required();
    report_cmd->add_option("--responses", report.responses, "Responses path")->required();
    report_cmd->add_option("--group-by", report.group_by, "Comma-separated group fields");
    report_cmd->add_option("--out", report.out, "Report CSV output path")->required();
    report_cmd->add_flag("--normal-ci", report.normal_ci,
                         "Use normal-approximation intervals instead of Wilson");

    ValidateArgs validate;
    auto* validate_cmd =
        app.add_subcommand("validate", "Check stories against their storyboards");
    validate_cmd->add_option("--data", validate.data, "Dataset path");
    validate_cmd->add_option("--board", validate.board, "Storyboard file path");
    validate_cmd->add_flag("--strict", validate.strict, "Exit nonzero on any violation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help / --version
        }
        app.exit(e);
        return kExitBadParams;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (run_cmd->parsed()) return cmd_run(run);
        if (score_cmd->parsed()) return cmd_score(score);
        if (report_cmd->parsed()) return cmd_report(report);
        if (validate_cmd->parsed()) return cmd_validate(validate);
    } catch (const tomsim::AuthError& e) {
        std::cerr << e.what() << "\n";
        return kExitAuthFailure;
    } catch (const tomsim::RecordMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitMismatch;
    } catch (const tomsim::DuplicateResponse& e) {
        std::cerr << e.what() << "\n";
        return kExitMismatch;
    } catch (const tomsim::ManifestMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitMismatch;
    } catch (const tomsim::UnknownField& e) {
        std::cerr << e.what() << "\n";
        return kExitBadParams;
    } catch (const tomsim::InvalidParams& e) {
        std::cerr << e.what() << "\n";
        return kExitBadParams;
    } catch (const tomsim::UnknownTemplate& e) {
        std::cerr << e.what() << "\n";
        return kExitBadParams;
    } catch (const tomsim::MissingRole& e) {
        std::cerr << e.what() << "\n";
        return kExitBadParams;
    } catch (const tomsim::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitIoFailure;
    } catch (const tomsim::IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIoFailure;
    } catch (const tomsim::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitIoFailure;
    }
    return kExitOk;
}
