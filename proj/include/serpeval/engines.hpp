#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "serpeval/corpus.hpp"
#include "serpeval/http.hpp"

namespace serpeval {

/// Markup did not have the expected structure. The message names the first
/// structural element that could not be matched.
class SerpParseError : public Error {
 public:
  explicit SerpParseError(const std::string& what) : Error(what, 1) {}
};

/// A query kept failing at the network level.
class QueryError : public Error {
 public:
  QueryError(const std::string& what, int attempts) : Error(what, 1), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

enum class AdapterMode { Fixture, Api, ScraperPlugin };

std::string_view to_string(AdapterMode mode);
AdapterMode parse_adapter_mode(std::string_view text);

/// Executes one query against one engine. Returns at most k results ranked
/// 1..n; throws TransportError for retryable network failures.
class EngineAdapter {
 public:
  virtual ~EngineAdapter() = default;
  virtual const std::string& id() const = 0;
  virtual AdapterMode mode() const = 0;
  virtual std::vector<SearchResult> search(const QuerySpec& query, int k) = 0;
};

struct SerpResponse {
  std::string engine_id;
  std::string query_id;
  std::vector<SearchResult> results;  // ordered by rank
  double elapsed_seconds = 0.0;       // dispatch -> parsed list, successful attempt
  int attempts = 1;
};

// -- SERP parsing -------------------------------------------------------------

using SerpParser =
    std::function<std::vector<SearchResult>(std::string_view html, std::string_view page_url)>;

/// Organic-result parser for the generic markup: a container with class
/// "results", entries with class "result", the first a[href] of an entry as
/// title link and an optional class "snippet" element. Relative hrefs are
/// resolved against <base href> or `page_url`.
std::vector<SearchResult> parse_generic_serp(std::string_view html, std::string_view page_url);

/// Per-engine parsers. Engines without a registered parser use the generic one.
class SerpParserRegistry {
 public:
  static SerpParserRegistry& instance();
  void add(std::string name, SerpParser parser);
  SerpParser find(std::string_view name) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, SerpParser, std::less<>> parsers_;
};

std::vector<SearchResult> parse_serp(std::string_view engine_id, std::string_view raw_html,
                                     std::string_view page_url = {});

// -- adapters -----------------------------------------------------------------

struct AdapterConfig {
  std::string id;
  AdapterMode mode = AdapterMode::Fixture;
  // fixture
  std::filesystem::path dir;
  std::chrono::milliseconds delay{0};
  // api / scraper-plugin
  std::string url_template;  // "{query}" and "{count}" placeholders
  std::string results_path = "results";
  std::string url_field = "url";
  std::string title_field = "title";
  std::string snippet_field = "snippet";
  std::string parser;  // scraper-plugin parser name; defaults to the engine id
};

/// Canned SERPs from `<dir>/<query_id>.ndjson` or `<dir>/<query_id>.html`.
class FixtureAdapter final : public EngineAdapter {
 public:
  FixtureAdapter(std::string id, std::filesystem::path dir,
                 std::chrono::milliseconds delay = std::chrono::milliseconds(0));
  const std::string& id() const override { return id_; }
  AdapterMode mode() const override { return AdapterMode::Fixture; }
  std::vector<SearchResult> search(const QuerySpec& query, int k) override;

 private:
  std::string id_;
  std::filesystem::path dir_;
  std::chrono::milliseconds delay_;
};

/// JSON search API reached through a URL template and field-path mapping.
class ApiAdapter final : public EngineAdapter {
 public:
  ApiAdapter(AdapterConfig config, std::shared_ptr<HttpClient> client);
  const std::string& id() const override { return config_.id; }
  AdapterMode mode() const override { return AdapterMode::Api; }
  std::vector<SearchResult> search(const QuerySpec& query, int k) override;

 private:
  AdapterConfig config_;
  std::shared_ptr<HttpClient> client_;
};

/// Fetches result-page HTML and hands it to a registered parser.
class ScraperAdapter final : public EngineAdapter {
 public:
  ScraperAdapter(AdapterConfig config, std::shared_ptr<HttpClient> client);
  const std::string& id() const override { return config_.id; }
  AdapterMode mode() const override { return AdapterMode::ScraperPlugin; }
  std::vector<SearchResult> search(const QuerySpec& query, int k) override;

 private:
  AdapterConfig config_;
  std::shared_ptr<HttpClient> client_;
};

/// Throws ConfigError for incomplete configurations.
std::unique_ptr<EngineAdapter> make_adapter(const AdapterConfig& config,
                                            std::shared_ptr<HttpClient> client);

/// Fills "{query}" (url-encoded) and "{count}".
std::string expand_url_template(std::string_view tmpl, std::string_view query_text, int count);

// -- execution ----------------------------------------------------------------

struct RetryOptions {
  int max_attempts = 3;
  std::chrono::milliseconds backoff{200};
};

/// Times retrieve+parse and enforces the adapter contract (ranks 1..n, n <= k).
SerpResponse execute_query(EngineAdapter& adapter, const QuerySpec& query, int k,
                           const RetryOptions& retry = {});

struct ProtocolOptions {
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds host_interval{500};
  int max_redirects = 5;
  RetryOptions retry;
};

struct ProtocolSummary {
  std::size_t groups = 0;
  std::size_t triplets = 0;
  std::size_t fetch_failures = 0;
  std::vector<std::string> query_failures;  // "engine/query: message"
};

/// Executes every (engine, query) group of the manifest, fetches each result
/// page and stores one triplet per result. Fetch failures are recorded in the
/// triplet; failed queries are reported in the summary and never abort.
ProtocolSummary run_protocol(const RunManifest& manifest,
                             const std::map<std::string, EngineAdapter*>& adapters,
                             RunStore& store, HttpClient& client,
                             const ProtocolOptions& options = {});

}  // namespace serpeval
