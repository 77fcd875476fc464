#include <gtest/gtest.h>

#include "serpeval/relevance_kernels.hpp"
#include "support/synthetic.hpp"

using namespace serpeval;

namespace {

LoadedRun random_run(std::uint64_t seed, int queries, int results) {
  std::mt19937_64 rng(seed);
  LoadedRun run;
  run.manifest.run_id = "k";
  run.manifest.engines = {"ea", "eb"};
  run.manifest.topics = {{"t", "T"}};
  run.manifest.results_per_query = results;
  for (int q = 0; q < queries; ++q) {
    QuerySpec spec{"q" + std::to_string(q), "t",
                   testsupport::join(testsupport::draw(rng, testsupport::topic_words(), 1 + rng() % 4)),
                   rng() % 4 == 0};
    run.manifest.queries.push_back(spec);
    for (const auto& engine : run.manifest.engines) {
      auto& group = run.groups[{engine, spec.id}];
      for (int r = 1; r <= results; ++r) {
        Triplet t;
        t.engine_id = engine;
        t.query_id = spec.id;
        t.rank = r;
        t.url = "https://k.example/" + spec.id + "/" + std::to_string(r);
        if (rng() % 10 != 0) {
          auto words = testsupport::draw(rng, testsupport::filler_words(), rng() % 60);
          auto extra = testsupport::draw(rng, testsupport::topic_words(), rng() % 6);
          words.insert(words.end(), extra.begin(), extra.end());
          std::shuffle(words.begin(), words.end(), rng);
          t.content = testsupport::join(words);
        }
        group.push_back(t);
      }
    }
  }
  return run;
}

}  // namespace

TEST(BuildScopes, SkipsTripletsWithoutContent) {
  auto run = random_run(1, 3, 10);
  auto scopes = build_scopes(run);
  ASSERT_EQ(scopes.size(), 6u);
  for (const auto& scope : scopes) {
    const auto& group = *run.group(scope.key);
    std::size_t with_content = std::count_if(group.begin(), group.end(),
                                             [](const Triplet& t) { return t.content.has_value(); });
    EXPECT_EQ(scope.docs.size(), with_content);
    EXPECT_EQ(scope.ranks.size(), scope.docs.size());
    EXPECT_TRUE(std::is_sorted(scope.ranks.begin(), scope.ranks.end()));
  }
}

TEST(ScoringKernels, ParallelMatchesSerialExactly) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    auto scopes = build_scopes(random_run(seed, 12, 20));
    auto serial = score_scopes_serial(scopes);
    auto parallel = score_scopes_parallel(scopes);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      EXPECT_EQ(serial[i].engine_id, parallel[i].engine_id);
      EXPECT_EQ(serial[i].query_id, parallel[i].query_id);
      EXPECT_EQ(serial[i].rank, parallel[i].rank);
      EXPECT_EQ(serial[i].url, parallel[i].url);
      EXPECT_EQ(serial[i].weight, parallel[i].weight) << i;
      EXPECT_EQ(serial[i].total_documents, parallel[i].total_documents);
    }
  }
}

TEST(ScoringKernels, EmptyInput) {
  EXPECT_TRUE(score_scopes_serial({}).empty());
  EXPECT_TRUE(score_scopes_parallel({}).empty());
  EXPECT_GE(scoring_threads(), 1);
}
