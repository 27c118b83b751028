#include <benchmark/benchmark.h>

#include "tomsim/epistemics.hpp"
#include "tomsim/eval.hpp"
#include "tomsim/modelgw.hpp"
#include "tomsim/render.hpp"
#include "tomsim/simulator.hpp"
#include "tomsim/storyboard.hpp"
#include "tomsim/suites.hpp"

namespace {

using namespace tomsim;

const SuiteParams kParams{1, 30, 8, 6, 100};

void BM_Simulate(benchmark::State& state) {
    BuiltBoard built = first_order_board(kParams, 7);
    Seed seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(built.board, seed++));
    }
}
BENCHMARK(BM_Simulate);

void BM_Track(benchmark::State& state) {
    BuiltBoard built = first_order_board(kParams, 7);
    Story story = simulate(built.board, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(track(story));
    }
}
BENCHMARK(BM_Track);

void BM_RenderStory(benchmark::State& state) {
    BuiltBoard built = first_order_board(kParams, 7);
    Story story = simulate(built.board, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_story(story));
    }
}
BENCHMARK(BM_RenderStory);

void BM_MisleadRecord(benchmark::State& state) {
    MisleadOptions options;
    options.distances = {30};
    options.trials = 1;
    Seed seed = 0;
    for (auto _ : state) {
        options.base_seed = seed++;
        benchmark::DoNotOptimize(gen_mislead_suite(options));
    }
}
BENCHMARK(BM_MisleadRecord);

void BM_ScoreSweep(benchmark::State& state) {
    MisleadOptions options;
    options.distances = {1, 30, 80};
    options.trials = 10;
    Dataset ds = gen_mislead_suite(options);
    auto responses = run_dataset(make_bot(BotKind::oracle), ds);
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_dataset(ds, responses));
    }
}
BENCHMARK(BM_ScoreSweep);

}  // namespace

BENCHMARK_MAIN();
