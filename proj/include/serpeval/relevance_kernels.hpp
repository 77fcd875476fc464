#pragma once

#include <span>
#include <vector>

#include "serpeval/corpus.hpp"
#include "serpeval/relevance.hpp"

namespace serpeval {

/// Documents of one (engine, query) group that were fetched successfully.
struct ScoringScope {
  GroupKey key;
  WordGroupHierarchy hierarchy;
  std::vector<DocumentText> docs;
  std::vector<int> ranks;  // engine rank of each doc
};

/// Scopes in group order; triplets without content are left out of the scope.
std::vector<ScoringScope> build_scopes(const LoadedRun& run);

/// Reference implementation: one scope at a time, build_index + compute_weight.
std::vector<RelevanceScore> score_scopes_serial(std::span<const ScoringScope> scopes);

/// OpenMP implementation over all (scope, document) pairs. Output order and
/// values are identical to the serial reference.
std::vector<RelevanceScore> score_scopes_parallel(std::span<const ScoringScope> scopes);

/// Threads available to the parallel kernel.
int scoring_threads();

}  // namespace serpeval
