#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "serpeval/corpus.hpp"
#include "serpeval/http.hpp"

namespace serpeval {

enum class LinkState { Alive, Dead, SuspectSoft404 };

std::string_view to_string(LinkState state);
LinkState parse_link_state(std::string_view text);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds retry_delay{std::chrono::minutes(2)};
  int max_redirects = 5;
  /// Case-insensitive phrases that mark an alive page as a suspected soft 404
  /// when found in its title or the start of its visible text.
  std::vector<std::string> soft404_phrases = {"not found", "page inexistante"};
};

struct LinkStatus {
  std::string url;
  LinkState state = LinkState::Alive;
  int attempts = 0;
  std::optional<int> final_http_status;
  std::int64_t checked_at = 0;
  std::string error;

  /// 0 for a dead link, 1 otherwise. Suspected soft 404s stay alive.
  int note() const { return state == LinkState::Dead ? 0 : 1; }
};

/// Dead only after `max_attempts` consecutive failures (transport error, or
/// HTTP >= 400 after at most `max_redirects` redirects; a loop fails).
LinkStatus check_link(const std::string& url, const RetryPolicy& policy, HttpClient& client,
                      HostRateLimiter* limiter = nullptr);

// -- redundancy -------------------------------------------------------------------

enum class RedundancyLevel { ExactUrl, SameSite };

std::string_view to_string(RedundancyLevel level);
RedundancyLevel parse_redundancy_level(std::string_view text);

struct RedundancyGroup {
  std::string representative_url;  // lowest-ranked member
  std::vector<std::string> member_urls;
  std::vector<int> member_ranks;
  RedundancyLevel level = RedundancyLevel::ExactUrl;
};

struct RedundancyResult {
  std::vector<RedundancyGroup> groups;
  std::size_t redundant_count = 0;      // members beyond the first of each group
  std::vector<bool> redundant;          // per input position; representatives are false
};

/// The key two results share when they are redundant at `level`.
std::string redundancy_key(std::string_view url, RedundancyLevel level);

RedundancyResult detect_redundant(std::span<const SearchResult> results,
                                  RedundancyLevel level = RedundancyLevel::ExactUrl);

// -- parasites --------------------------------------------------------------------

/// True iff no query word occurs in the document tokens. Both sides are
/// expected to be tokenized (case-folded) already.
bool detect_parasite(std::span<const std::string> query_words,
                     std::span<const std::string> content_tokens);

struct ParasiteCheck {
  bool parasite = false;
  bool scorable = true;     // false when the page content is unavailable
  bool blocklisted = false;
};

struct ParasiteOptions {
  std::vector<std::string> host_blocklist;  // commercial hosts; empty = off
};

ParasiteCheck classify_parasite(const QuerySpec& query, const Triplet& triplet,
                                const ParasiteOptions& options = {});

// -- report -----------------------------------------------------------------------

struct LinkRecord {
  std::string engine_id;
  std::string query_id;
  int rank = 0;
  LinkStatus status;
  ParasiteCheck parasite;
  bool redundant = false;
};

struct GroupProbe {
  GroupKey group;
  std::size_t analyzed_count = 0;
  std::size_t dead_count = 0;
  std::size_t redundant_count = 0;
  std::size_t parasite_count = 0;
  std::size_t suspect_count = 0;
  std::size_t unscorable_count = 0;
  std::size_t redundancy_note = 0;  // analyzed_count - redundant_count
  std::vector<RedundancyGroup> redundancy_groups;
};

struct EngineProbe {
  std::string engine_id;
  std::size_t analyzed = 0;
  std::size_t dead = 0;
  std::size_t parasites = 0;
  std::size_t redundant = 0;
  std::size_t suspect = 0;
  double dead_rate = 0.0;        // percent of analyzed links
  double parasite_rate = 0.0;    // percent
  double redundancy_rate = 0.0;  // percent
  double avg_response_time = 0.0;  // seconds, mean over answered queries
  std::size_t timed_queries = 0;
};

struct ProbeReport {
  RedundancyLevel level = RedundancyLevel::ExactUrl;
  std::vector<LinkRecord> links;
  std::vector<GroupProbe> groups;
  std::vector<EngineProbe> engines;  // manifest engine order

  const EngineProbe* engine(std::string_view id) const;
};

struct ProbeOptions {
  RetryPolicy retry;
  RedundancyLevel redundancy = RedundancyLevel::ExactUrl;
  ParasiteOptions parasites;
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds host_interval{500};
};

using LinkKey = std::tuple<std::string, std::string, int>;  // engine, query, rank

/// Pure aggregation over a loaded run and per-link statuses. Links without a
/// status are treated as alive and unprobed.
ProbeReport score_performance(const LoadedRun& run, const std::map<LinkKey, LinkStatus>& statuses,
                              const ProbeOptions& options = {});

/// Checks every triplet URL concurrently and aggregates the report.
ProbeReport probe_run(const LoadedRun& run, HttpClient& client, const ProbeOptions& options = {});

std::string to_ndjson(const ProbeReport& report);
ProbeReport probe_report_from_ndjson(std::string_view text);

}  // namespace serpeval
