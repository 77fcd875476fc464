// Serial reference vs OpenMP scoring kernel over synthetic runs.

#include <benchmark/benchmark.h>

#include <random>

#include "serpeval/relevance_kernels.hpp"

using namespace serpeval;

namespace {

const std::vector<std::string> kFiller = {"the", "of", "and", "page", "site", "news", "home", "about",
                                          "list", "view", "price", "shop", "daily", "city", "guide", "world"};
const std::vector<std::string> kTopic = {"protein", "enzyme", "orbit", "galaxy", "tariff", "glacier",
                                         "sonnet", "compiler", "kernel", "vaccine", "basalt", "magma"};

std::string words(std::mt19937_64& rng, const std::vector<std::string>& from, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += from[rng() % from.size()];
  }
  return out;
}

// `queries` queries, three engines, 20 results each, pages of ~`page_words` words.
std::vector<ScoringScope> make_scopes(int queries, std::size_t page_words) {
  std::mt19937_64 rng(42);
  LoadedRun run;
  run.manifest.run_id = "bench";
  run.manifest.engines = {"ea", "eb", "ec"};
  run.manifest.topics = {{"t", "T"}};
  run.manifest.results_per_query = 20;
  for (int q = 0; q < queries; ++q) {
    QuerySpec spec{"q" + std::to_string(q), "t", words(rng, kTopic, 1 + rng() % 4), false};
    run.manifest.queries.push_back(spec);
    for (const auto& engine : run.manifest.engines) {
      auto& group = run.groups[{engine, spec.id}];
      for (int r = 1; r <= 20; ++r) {
        Triplet t;
        t.engine_id = engine;
        t.query_id = spec.id;
        t.rank = r;
        t.url = "https://bench.example/" + spec.id + "/" + engine + "/" + std::to_string(r);
        t.content = words(rng, kFiller, page_words) + " " + spec.text + " " + words(rng, kTopic, 8);
        group.push_back(std::move(t));
      }
    }
  }
  return build_scopes(run);
}

void BM_ScoreSerial(benchmark::State& state) {
  const auto scopes = make_scopes(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(score_scopes_serial(scopes));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 60);
}

void BM_ScoreParallel(benchmark::State& state) {
  const auto scopes = make_scopes(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  state.counters["threads"] = scoring_threads();
  for (auto _ : state) benchmark::DoNotOptimize(score_scopes_parallel(scopes));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 60);
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Args({30, 300})->Args({120, 1000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Args({30, 300})->Args({120, 1000})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
