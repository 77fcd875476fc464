#include "serpeval/relevance_kernels.hpp"

#include <omp.h>

namespace serpeval {

std::vector<ScoringScope> build_scopes(const LoadedRun& run) {
  std::vector<ScoringScope> scopes;
  for (const auto& [key, triplets] : run.groups) {
    const QuerySpec* query = run.manifest.find_query(key.query_id);
    if (!query) continue;
    ScoringScope scope;
    scope.key = key;
    scope.hierarchy = build_hierarchy(*query);
    for (const auto& t : triplets) {
      if (!t.content) continue;
      scope.docs.push_back(make_document(t.url, *t.content));
      scope.ranks.push_back(t.rank);
    }
    scopes.push_back(std::move(scope));
  }
  return scopes;
}

namespace {

void label(RelevanceScore& score, const ScoringScope& scope, std::size_t doc) {
  score.engine_id = scope.key.engine_id;
  score.query_id = scope.key.query_id;
  score.url = scope.docs[doc].url;
  score.rank = scope.ranks[doc];
}

}  // namespace

std::vector<RelevanceScore> score_scopes_serial(std::span<const ScoringScope> scopes) {
  std::vector<RelevanceScore> out;
  for (const auto& scope : scopes) {
    auto index = build_index(scope.docs, scope.hierarchy);
    for (std::size_t d = 0; d < scope.docs.size(); ++d) {
      auto score = compute_weight(scope.hierarchy, index, d);
      label(score, scope, d);
      out.push_back(std::move(score));
    }
  }
  return out;
}

std::vector<RelevanceScore> score_scopes_parallel(std::span<const ScoringScope> scopes) {
  // Flatten (scope, doc) pairs so small scopes do not starve threads.
  std::vector<std::size_t> first(scopes.size() + 1, 0);
  for (std::size_t s = 0; s < scopes.size(); ++s) first[s + 1] = first[s] + scopes[s].docs.size();
  const std::size_t total = first.back();
  std::vector<std::size_t> owner(total);
  for (std::size_t s = 0; s < scopes.size(); ++s)
    for (std::size_t i = first[s]; i < first[s + 1]; ++i) owner[i] = s;

  std::vector<OccurrenceIndex> indexes(scopes.size());
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    auto& index = indexes[s];
    index.total_documents = scopes[s].docs.size();
    index.documents_with_group.assign(scopes[s].hierarchy.groups.size(), 0);
    index.frequency.resize(scopes[s].docs.size());
    index.document_length.resize(scopes[s].docs.size());
  }

  const auto n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t s = owner[static_cast<std::size_t>(i)];
    const std::size_t d = static_cast<std::size_t>(i) - first[s];
    const auto& scope = scopes[s];
    const auto& tokens = scope.docs[d].tokens;
    std::vector<std::size_t> row(scope.hierarchy.groups.size());
    for (std::size_t g = 0; g < row.size(); ++g) row[g] = count_group(tokens, scope.hierarchy.groups[g]);
    indexes[s].frequency[d] = std::move(row);
    indexes[s].document_length[d] = tokens.size();
  }

  for (std::size_t s = 0; s < scopes.size(); ++s) {
    auto& index = indexes[s];
    for (const auto& row : index.frequency)
      for (std::size_t g = 0; g < row.size(); ++g)
        if (row[g] > 0) ++index.documents_with_group[g];
  }

  std::vector<RelevanceScore> out(total);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t s = owner[static_cast<std::size_t>(i)];
    const std::size_t d = static_cast<std::size_t>(i) - first[s];
    auto score = compute_weight(scopes[s].hierarchy, indexes[s], d);
    label(score, scopes[s], d);
    out[static_cast<std::size_t>(i)] = std::move(score);
  }
  return out;
}

int scoring_threads() { return omp_get_max_threads(); }

}  // namespace serpeval
