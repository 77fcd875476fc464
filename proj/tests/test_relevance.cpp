#include <gtest/gtest.h>

#include <cmath>

#include "serpeval/relevance.hpp"

using namespace serpeval;

namespace {

std::vector<DocumentText> docs(std::initializer_list<const char*> texts) {
  std::vector<DocumentText> out;
  int i = 0;
  for (const char* t : texts) out.push_back(make_document("https://d.example/" + std::to_string(i++), t));
  return out;
}

RelevanceScore score(std::string engine, std::string query, int rank, double weight) {
  RelevanceScore s;
  s.engine_id = std::move(engine);
  s.query_id = std::move(query);
  s.rank = rank;
  s.weight = weight;
  s.url = "https://x.example/" + std::to_string(rank);
  return s;
}

}  // namespace

TEST(Hierarchy, IncrementalPrefixesLongestFirst) {
  auto h = build_hierarchy(QuerySpec{"q", "t", "Solar Wind Speed", false});
  EXPECT_EQ(h.query_length, 3u);
  ASSERT_EQ(h.groups.size(), 3u);
  EXPECT_EQ(h.groups[0], (std::vector<std::string>{"solar", "wind", "speed"}));
  EXPECT_EQ(h.groups[1], (std::vector<std::string>{"solar", "wind"}));
  EXPECT_EQ(h.groups[2], (std::vector<std::string>{"solar"}));
}

TEST(Hierarchy, ExactModeHasOneGroup) {
  auto h = build_hierarchy("q", {"solar", "wind"}, true);
  ASSERT_EQ(h.groups.size(), 1u);
  EXPECT_EQ(h.groups[0].size(), 2u);
  EXPECT_TRUE(h.exact_mode);
}

TEST(GroupContribution, MatchesFormula) {
  EXPECT_DOUBLE_EQ(group_contribution(1, 4, 2, 2, 3, 1), 0.25 * 2.0 * std::log2(3.0));
  EXPECT_DOUBLE_EQ(group_contribution(2, 10, 1, 3, 8, 2), 0.2 * (1.0 / 3.0) * 2.0);
  EXPECT_EQ(group_contribution(0, 10, 1, 1, 5, 0), 0.0);
  EXPECT_EQ(group_contribution(3, 9, 1, 1, 4, 4), 0.0);
}

TEST(BuildIndex, CountsDocumentsAndFrequencies) {
  auto h = build_hierarchy("q", {"alpha", "beta"}, false);
  auto d = docs({"alpha beta alpha", "beta", "gamma"});
  auto index = build_index(d, h);
  EXPECT_EQ(index.total_documents, 3u);
  EXPECT_EQ(index.documents_with_group, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(index.frequency[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(index.frequency[1], (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(index.document_length, (std::vector<std::size_t>{3, 1, 1}));
}

TEST(ComputeWeight, HandWorkedScope) {
  auto h = build_hierarchy("q", {"alpha", "beta"}, false);
  auto d = docs({"alpha beta gamma delta", "alpha gamma gamma delta", "gamma delta omega sigma"});
  auto index = build_index(d, h);
  const double expected[] = {0.25 * 2.0 * std::log2(3.0) + 0.25 * 0.5 * std::log2(1.5),
                             0.25 * 0.5 * std::log2(1.5), 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    auto by_index = compute_weight(h, index, i);
    auto by_doc = compute_weight(h, d[i], index);
    EXPECT_NEAR(by_index.weight, expected[i], 1e-12);
    EXPECT_DOUBLE_EQ(by_doc.weight, by_index.weight);
    EXPECT_EQ(by_index.total_documents, 3u);
    ASSERT_EQ(by_index.contributions.size(), 2u);
    EXPECT_EQ(by_index.contributions[0].group, "alpha beta");
  }
}

TEST(ComputeWeight, EmptyDocumentIsDegenerate) {
  auto h = build_hierarchy("q", {"alpha"}, false);
  auto d = docs({"", "alpha"});
  auto index = build_index(d, h);
  auto s = compute_weight(h, index, 0);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.weight, 0.0);
  EXPECT_FALSE(std::isnan(compute_weight(h, index, 1).weight));
}

TEST(RankGroup, DescendingWeightTiesByRank) {
  auto ranked = rank_group({score("e", "q", 1, 0.1), score("e", "q", 2, 0.5), score("e", "q", 3, 0.1),
                            score("e", "q", 4, 0.9)});
  std::vector<int> ranks;
  for (const auto& s : ranked) ranks.push_back(s.rank);
  EXPECT_EQ(ranks, (std::vector<int>{4, 2, 1, 3}));
}

TEST(QueryNotes, PooledMinMax) {
  auto notes = query_notes({{"ea", {2.0, 4.0}}, {"eb", {0.0, 2.0}}, {"ec", {}}});
  EXPECT_DOUBLE_EQ(notes.at("ea").value, 7.5);
  EXPECT_DOUBLE_EQ(notes.at("eb").value, 2.5);
  EXPECT_FALSE(notes.at("ea").degenerate);
  EXPECT_EQ(notes.count("ec"), 0u);
}

TEST(QueryNotes, ConstantPoolIsFlagged) {
  auto notes = query_notes({{"ea", {1.0, 1.0}}, {"eb", {1.0}}});
  EXPECT_DOUBLE_EQ(notes.at("ea").value, 5.0);
  EXPECT_TRUE(notes.at("eb").degenerate);
}

TEST(ScaleToTen, TopicMeansInManifestOrder) {
  RunManifest m;
  m.run_id = "r";
  m.engines = {"ea", "eb"};
  m.topics = {{"t2", "Second"}, {"t1", "First"}};
  m.queries = {{"q1", "t1", "a", false}, {"q2", "t1", "b", false}, {"q3", "t2", "c", false}};
  std::vector<RelevanceScore> scores = {score("ea", "q1", 1, 2.0), score("ea", "q1", 2, 4.0),
                                        score("eb", "q1", 1, 0.0), score("eb", "q1", 2, 2.0),
                                        score("ea", "q2", 1, 1.0), score("eb", "q2", 1, 1.0),
                                        score("ea", "q3", 1, 3.0)};
  auto rows = scale_to_ten(m, scores);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].topic_id, "t2");
  EXPECT_EQ(rows[0].notes.count("eb"), 0u);
  EXPECT_TRUE(rows[0].notes.at("ea").degenerate);
  EXPECT_EQ(rows[1].label, "First");
  EXPECT_EQ(rows[1].queries, 2u);
  EXPECT_DOUBLE_EQ(rows[1].notes.at("ea").value, 6.25);
  EXPECT_DOUBLE_EQ(rows[1].notes.at("eb").value, 3.75);
  EXPECT_TRUE(rows[1].notes.at("ea").degenerate);
}

TEST(Round2, HalfAwayFromZero) {
  EXPECT_DOUBLE_EQ(round2(2.825), std::round(2.825 * 100.0) / 100.0);
  EXPECT_DOUBLE_EQ(round2(2.8333), 2.83);
  EXPECT_DOUBLE_EQ(round2(7.5), 7.5);
  EXPECT_DOUBLE_EQ(round2(-1.236), -1.24);
}

TEST(RelevanceNdjson, RoundTrip) {
  RunManifest m;
  m.run_id = "r";
  m.engines = {"ea"};
  m.topics = {{"t1", "T"}};
  m.queries = {{"q1", "t1", "alpha beta", false}};
  auto h = build_hierarchy(m.queries[0]);
  auto d = docs({"alpha beta", "beta alpha alpha"});
  auto index = build_index(d, h);
  std::vector<RelevanceScore> scores;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto s = compute_weight(h, index, i);
    s.engine_id = "ea";
    s.query_id = "q1";
    s.rank = static_cast<int>(i) + 1;
    s.url = d[i].url;
    scores.push_back(s);
  }
  auto back = relevance_scores_from_ndjson(to_ndjson(scores, m));
  ASSERT_EQ(back.size(), scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    EXPECT_EQ(back[i].weight, scores[i].weight);
    EXPECT_EQ(back[i].url, scores[i].url);
    EXPECT_EQ(back[i].rank, scores[i].rank);
    EXPECT_EQ(back[i].contributions.size(), scores[i].contributions.size());
  }
}
