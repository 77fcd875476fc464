#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "serpeval/corpus.hpp"
#include "serpeval/extraction.hpp"

namespace serpeval {

/// Word groups weighted for one query, longest first. In the incremental mode
/// an n-word query yields its prefixes of length n, n-1, ..., 1; the exact
/// mode yields the whole query once.
struct WordGroupHierarchy {
  std::string query_id;
  std::vector<std::vector<std::string>> groups;
  bool exact_mode = false;
  std::size_t query_length = 0;  // words in the full query
};

WordGroupHierarchy build_hierarchy(const QuerySpec& query);
WordGroupHierarchy build_hierarchy(std::string query_id, std::vector<std::string> words,
                                   bool exact_mode);

/// Occurrence statistics over one scoring scope (one engine's analyzed
/// results for one query).
struct OccurrenceIndex {
  std::size_t total_documents = 0;                 // TNRD
  std::vector<std::size_t> documents_with_group;   // NDWGR' per group
  std::vector<std::vector<std::size_t>> frequency; // [doc][group]
  std::vector<std::size_t> document_length;        // tokens per doc
};

OccurrenceIndex build_index(std::span<const DocumentText> docs, const WordGroupHierarchy& hierarchy);

struct GroupContribution {
  std::string group;  // words joined by spaces
  std::size_t group_length = 0;
  std::size_t frequency = 0;
  std::size_t documents_with_group = 0;
  double contribution = 0.0;
};

struct RelevanceScore {
  std::string engine_id;
  std::string query_id;
  std::string url;
  int rank = 0;
  double weight = 0.0;
  std::size_t total_documents = 0;
  std::size_t document_length = 0;
  bool degenerate = false;  // zero-length document
  std::vector<GroupContribution> contributions;
};

/// One summand of the weighting formula:
///   (frequency / doc_length) * (group_length^2 / query_length) * log2(tnrd / ndwg)
/// Zero when the group is absent from the document (no logarithm is taken).
double group_contribution(std::size_t frequency, std::size_t doc_length, std::size_t group_length,
                          std::size_t query_length, std::size_t tnrd, std::size_t ndwg);

/// Weight of document `doc` of the index scope.
RelevanceScore compute_weight(const WordGroupHierarchy& hierarchy, const OccurrenceIndex& index,
                              std::size_t doc);

/// Same, counting the document's group frequencies directly; `doc` must be
/// part of the scope the index was built over.
RelevanceScore compute_weight(const WordGroupHierarchy& hierarchy, const DocumentText& doc,
                              const OccurrenceIndex& index);

/// Stable sort by descending weight; ties keep ascending engine rank.
std::vector<RelevanceScore> rank_group(std::vector<RelevanceScore> scores);

// -- note on 10 ---------------------------------------------------------------------

struct Note {
  double value = 0.0;
  bool degenerate = false;  // pool had a single distinct weight
};

/// One query: every weight of every engine is min-max normalized over the
/// pooled weights, each engine's mean is scaled by 10. A constant pool gives
/// 5.0 for everyone, flagged. Engines without weights are omitted.
std::map<std::string, Note> query_notes(const std::map<std::string, std::vector<double>>& weights);

struct TopicNotes {
  std::string topic_id;
  std::string label;
  std::map<std::string, Note> notes;  // per engine, mean over the topic's queries, 2 decimals
  std::size_t queries = 0;
};

/// Rows in manifest topic order.
std::vector<TopicNotes> scale_to_ten(const RunManifest& manifest,
                                     std::span<const RelevanceScore> scores);

double round2(double value);

std::string to_ndjson(std::span<const RelevanceScore> scores, const RunManifest& manifest);
std::vector<RelevanceScore> relevance_scores_from_ndjson(std::string_view text);

}  // namespace serpeval
