#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "serpeval/common.hpp"

namespace serpeval {

/// Raised for runs, users or results that do not exist.
class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& what) : Error(what, 3) {}
};

struct Topic {
  std::string id;
  std::string label;
};

struct QuerySpec {
  std::string id;
  std::string topic_id;
  std::string text;  // as typed
  bool exact_mode = false;

  /// Tokenized, case-folded query words; length(R) is words().size().
  std::vector<std::string> words() const;
};

struct SearchResult {
  std::string engine_id;
  std::string query_id;
  int rank = 0;  // 1-based
  std::string url;
  std::string title;
  std::string snippet;
};

/// One archived (query, url, page content) unit, keyed by engine and rank.
struct Triplet {
  std::string engine_id;
  std::string query_id;
  int rank = 0;
  std::string url;
  std::string title;
  std::string snippet;
  std::optional<std::string> content;  // extracted text; absent iff the fetch failed
  std::int64_t fetched_at = 0;         // UTC seconds
  std::optional<int> http_status;

  bool operator==(const Triplet&) const = default;
};

struct RunManifest {
  std::string run_id;
  std::vector<std::string> engines;
  std::vector<Topic> topics;
  std::vector<QuerySpec> queries;
  int results_per_query = 20;
  std::int64_t created_at = 0;

  std::size_t expected_triplet_count() const {
    return queries.size() * engines.size() * static_cast<std::size_t>(results_per_query);
  }
  const QuerySpec* find_query(std::string_view id) const;
  const Topic* find_topic(std::string_view id) const;
  /// Throws ValidationError naming the first broken invariant.
  void validate() const;
};

/// Wall-clock time one engine took to answer one query.
struct SerpTiming {
  std::string engine_id;
  std::string query_id;
  double elapsed_seconds = 0.0;
  int result_count = 0;
  std::string error;
};

struct GroupKey {
  std::string engine_id;
  std::string query_id;
  auto operator<=>(const GroupKey&) const = default;
};

struct Gap {
  GroupKey group;
  std::vector<int> missing_ranks;
};

struct CorruptRecord {
  std::size_t line = 0;    // 1-based
  std::size_t offset = 0;  // byte offset of the line start
  std::string message;
};

struct LoadedRun {
  RunManifest manifest;
  std::map<GroupKey, std::vector<Triplet>> groups;  // each ordered by rank
  std::vector<SerpTiming> timings;
  std::vector<Gap> gaps;
  std::vector<CorruptRecord> corruption;

  std::size_t triplet_count() const;
  const std::vector<Triplet>* group(const GroupKey& key) const;
};

struct Violation {
  enum class Kind { DuplicateRank, MissingRank, CountMismatch, UnknownGroup };
  Kind kind;
  GroupKey group;
  std::string detail;
};

std::string_view to_string(Violation::Kind kind);

/// "run/engine/query/rank"
std::string triplet_key(std::string_view run_id, const Triplet& triplet);

/// Pure protocol check over a list of records (duplicates allowed).
std::vector<Violation> validate_triplets(const RunManifest& manifest,
                                         std::span<const Triplet> triplets);

/// Directory-backed run storage:
///   <root>/<run_id>/manifest
///   <root>/<run_id>/triplets.ndjson
///   <root>/<run_id>/responses.ndjson
///   <root>/<run_id>/raw/<engine>/<query>/<rank>.html
/// Appends to one run are serialized; the latest record for a key wins.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(std::string_view run_id) const;
  bool exists(std::string_view run_id) const;

  /// Writes the manifest. Throws Error when the run exists and !overwrite;
  /// with overwrite the previous run directory is removed first.
  void create_run(const RunManifest& manifest, bool overwrite = false);
  RunManifest load_manifest(std::string_view run_id) const;

  std::string store_triplet(std::string_view run_id, const Triplet& triplet);
  void store_raw_html(std::string_view run_id, const Triplet& triplet, std::string_view html);
  std::optional<std::string> load_raw_html(std::string_view run_id, const Triplet& triplet) const;
  void record_timing(std::string_view run_id, const SerpTiming& timing);

  LoadedRun load_run(std::string_view run_id) const;
  std::vector<Violation> validate_run(std::string_view run_id) const;

 private:
  std::mutex& run_mutex(std::string_view run_id);
  void append_line(std::string_view run_id, const std::string& file, const std::string& line);

  std::filesystem::path root_;
  std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> run_mutexes_;
};

void to_json(nlohmann::json& j, const Topic& t);
void from_json(const nlohmann::json& j, Topic& t);
void to_json(nlohmann::json& j, const QuerySpec& q);
void from_json(const nlohmann::json& j, QuerySpec& q);
void to_json(nlohmann::json& j, const Triplet& t);
void from_json(const nlohmann::json& j, Triplet& t);
void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);
void to_json(nlohmann::json& j, const SerpTiming& t);
void from_json(const nlohmann::json& j, SerpTiming& t);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace serpeval
