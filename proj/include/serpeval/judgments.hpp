#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "serpeval/corpus.hpp"
#include "serpeval/relevance.hpp"

namespace serpeval {

class DuplicateError : public Error {
 public:
  explicit DuplicateError(const std::string& what) : Error(what, 2) {}
};

/// Profile captured at a user's first connection, in four categories.
struct StaticContext {
  struct Connection {
    std::string email;
    std::string password_hash;
  };
  struct Personal {
    std::string name;
    std::string country;
    std::string language;
  };
  struct Interests {
    std::string domains;
    std::string specialty;
  };
  struct Competence {
    std::string profession;
    std::string study_level;
  };

  std::string user_id;
  Connection connection;
  Personal personal;
  Interests interests;
  Competence competence;
  std::int64_t created_at = 0;
};

struct Registration {
  std::string email;
  std::string password;  // plaintext, hashed before storage
  StaticContext::Personal personal;
  StaticContext::Interests interests;
  StaticContext::Competence competence;
};

constexpr int kMinVote = 0;
constexpr int kMaxVote = 5;

struct Judgment {
  std::string user_id;
  std::string run_id;
  std::string engine_id;
  std::string query_id;
  int rank = 0;
  int vote = 0;
  std::int64_t voted_at = 0;

  bool operator==(const Judgment&) const = default;
};

using JudgmentKey = std::tuple<std::string, std::string, std::string, int>;  // run, engine, query, rank

struct SessionSummary {
  std::string session_id;
  std::string run_id;
  std::int64_t opened_at = 0;
  std::int64_t closed_at = 0;
  std::size_t judgments = 0;
};

/// A user's judgment history across sessions.
struct DynamicContext {
  std::string user_id;
  std::vector<Judgment> history;  // append order
  std::vector<SessionSummary> sessions;

  /// Current vote per result: the last vote in history order.
  std::map<JudgmentKey, int> replay() const;
};

std::string hash_password(std::string_view password);
bool verify_password(std::string_view password, std::string_view stored_hash);

/// User context base under a directory (usually <root>/contexts):
///   users/<user_id>.json        static context
///   judgments/<user_id>.ndjson  append-only judgment and session log
class ContextBase {
 public:
  explicit ContextBase(std::filesystem::path dir);

  /// Throws DuplicateError for a registered email, ValidationError (with the
  /// offending field) for a malformed email or a password under 8 chars.
  std::string register_user(const Registration& registration);
  std::optional<StaticContext> authenticate(std::string_view email, std::string_view password) const;
  std::optional<StaticContext> find_user(std::string_view user_id) const;
  std::vector<StaticContext> users() const;

  /// Validates vote range and that the judged result exists in `run`, then
  /// appends to the user's log. Later votes on the same result overwrite.
  DynamicContext record_judgment(Judgment judgment, const LoadedRun& run);
  void record_session(std::string_view user_id, const SessionSummary& session);

  DynamicContext dynamic_context(std::string_view user_id) const;
  /// Current judgments of every user for one run.
  std::vector<Judgment> current_judgments(std::string_view run_id) const;
  /// Current vote per rank of one user on one result group.
  std::map<int, int> group_votes(std::string_view user_id, std::string_view run_id,
                                 std::string_view engine_id, std::string_view query_id) const;

 private:
  void load();
  void append(std::string_view user_id, const std::string& line);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, StaticContext, std::less<>> users_;
  std::map<std::string, std::string, std::less<>> user_by_email_;
  std::map<std::string, DynamicContext, std::less<>> dynamic_;
  // user -> key -> latest judgment
  std::map<std::string, std::map<JudgmentKey, Judgment>, std::less<>> current_;
};

// -- aggregates -----------------------------------------------------------------------

struct RecallAtK {
  int k = 0;
  std::optional<double> value;  // absent when no rank in 1..k was judged
  std::size_t covered = 0;      // judged ranks within 1..k
  bool complete() const { return covered == static_cast<std::size_t>(k); }
};

/// Mean of the per-rank values over ranks 1..k that are present; missing ranks
/// are excluded, not zero-filled. Throws ValidationError for k < 1.
RecallAtK r_at_k(const std::map<int, double>& value_by_rank, int k);

/// Mean vote per rank across users for one (run, engine, query) group.
std::map<int, double> mean_votes_by_rank(std::span<const Judgment> judgments,
                                         std::string_view engine_id, std::string_view query_id);

struct AdjustedScore {
  int rank = 0;
  std::string url;
  double value = 0.0;  // in [0, 1]
  bool voted = false;
  std::size_t votes = 0;
};

/// Judged value = mean vote / 5 where votes exist; otherwise the formula
/// weight min-max normalized over the query's pooled weights (0.5 for a
/// constant pool), flagged as unvoted.
std::vector<AdjustedScore> recompute_relevance(std::span<const Judgment> judgments,
                                               std::span<const RelevanceScore> scores,
                                               std::string_view engine_id,
                                               std::string_view query_id);

}  // namespace serpeval
