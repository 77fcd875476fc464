#include "serpeval/engines.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "serpeval/extraction.hpp"
#include "serpeval/url.hpp"

namespace serpeval {

using nlohmann::json;

std::string_view to_string(AdapterMode mode) {
  switch (mode) {
    case AdapterMode::Fixture: return "fixture";
    case AdapterMode::Api: return "api";
    case AdapterMode::ScraperPlugin: return "scraper-plugin";
  }
  return "fixture";
}

AdapterMode parse_adapter_mode(std::string_view text) {
  if (text == "fixture") return AdapterMode::Fixture;
  if (text == "api") return AdapterMode::Api;
  if (text == "scraper-plugin") return AdapterMode::ScraperPlugin;
  throw ConfigError("unknown adapter mode '" + std::string(text) + "'");
}

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

// Dotted path lookup ("data.items"); null when any segment is missing.
const json* find_path(const json& root, std::string_view path) {
  const json* node = &root;
  while (!path.empty()) {
    auto dot = path.find('.');
    std::string key(path.substr(0, dot));
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
    path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
  }
  return node;
}

std::string string_at(const json& item, std::string_view path) {
  const json* node = find_path(item, path);
  if (!node || node->is_null()) return {};
  return node->is_string() ? node->get<std::string>() : node->dump();
}

// Ranks 1..n in list order, truncated to k.
void assign_ranks(std::vector<SearchResult>& results, int k) {
  if (static_cast<int>(results.size()) > k) results.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = static_cast<int>(i) + 1;
}

}  // namespace

// -- parsing --------------------------------------------------------------------

std::vector<SearchResult> parse_generic_serp(std::string_view html, std::string_view page_url) {
  auto tokens = lex_html(html);
  std::string base(page_url);
  for (const auto& t : tokens) {
    if (t.kind == HtmlToken::Kind::StartTag && t.name == "base") {
      if (auto href = t.attribute("href")) {
        if (is_absolute_url(*href)) {
          base = std::string(*href);
        } else if (auto resolved = resolve_url(base, *href)) {
          base = *resolved;
        }
      }
      break;
    }
  }

  auto container = std::find_if(tokens.begin(), tokens.end(), [](const HtmlToken& t) {
    return t.kind == HtmlToken::Kind::StartTag && t.has_class("results");
  });
  if (container == tokens.end())
    throw SerpParseError("unrecognized SERP markup: no results container (element with class \"results\")");

  struct Pending {
    std::string tag;
    int nest = 0;
    std::string href;
    std::string title;
    std::string snippet;
    bool in_anchor = false;
    bool anchor_done = false;
    std::string snippet_tag;
    int snippet_nest = 0;
  };

  std::vector<SearchResult> results;
  std::optional<Pending> current;

  auto finish = [&] {
    if (!current) return;
    std::size_t index = results.size() + 1;
    if (current->href.empty())
      throw SerpParseError("unrecognized SERP markup: result #" + std::to_string(index) +
                           " has no a[href] title link");
    std::string url = current->href;
    if (!is_absolute_url(url)) {
      auto resolved = base.empty() ? std::nullopt : resolve_url(base, url);
      if (!resolved)
        throw SerpParseError("unrecognized SERP markup: result #" + std::to_string(index) +
                             " href '" + url + "' cannot be absolutized");
      url = *resolved;
    }
    SearchResult r;
    r.url = std::move(url);
    r.title = collapse_whitespace(current->title);
    r.snippet = collapse_whitespace(current->snippet);
    results.push_back(std::move(r));
    current.reset();
  };

  const std::string container_tag = container->name;
  int container_nest = container->self_closing ? 0 : 1;
  for (auto it = std::next(container); it != tokens.end() && container_nest > 0; ++it) {
    const auto& t = *it;
    if (t.kind == HtmlToken::Kind::StartTag) {
      if (t.name == container_tag && !t.self_closing) ++container_nest;
      if (t.has_class("result")) {
        finish();
        current.emplace();
        current->tag = t.name;
        current->nest = t.self_closing ? 0 : 1;
        continue;
      }
      if (!current) continue;
      if (t.name == current->tag && !t.self_closing) ++current->nest;
      if (t.name == "a" && !current->anchor_done && !current->in_anchor) {
        if (auto href = t.attribute("href"); href && !href->empty()) {
          current->href = std::string(*href);
          current->in_anchor = true;
        }
      }
      if (current->snippet_nest > 0 && t.name == current->snippet_tag && !t.self_closing) {
        ++current->snippet_nest;
      } else if (current->snippet_nest == 0 && current->snippet.empty() && t.has_class("snippet") &&
                 !t.self_closing) {
        current->snippet_tag = t.name;
        current->snippet_nest = 1;
      }
    } else if (t.kind == HtmlToken::Kind::EndTag) {
      if (t.name == container_tag) --container_nest;
      if (!current) continue;
      if (t.name == "a" && current->in_anchor) {
        current->in_anchor = false;
        current->anchor_done = true;
      }
      if (current->snippet_nest > 0 && t.name == current->snippet_tag) --current->snippet_nest;
      if (t.name == current->tag && --current->nest <= 0) finish();
    } else if (t.kind == HtmlToken::Kind::Text && current && t.raw_element.empty()) {
      if (current->in_anchor) current->title += t.text;
      if (current->snippet_nest > 0) current->snippet += t.text;
    }
  }
  finish();
  return results;
}

SerpParserRegistry& SerpParserRegistry::instance() {
  static SerpParserRegistry registry;
  return registry;
}

void SerpParserRegistry::add(std::string name, SerpParser parser) {
  std::lock_guard lock(mutex_);
  parsers_.insert_or_assign(std::move(name), std::move(parser));
}

SerpParser SerpParserRegistry::find(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = parsers_.find(name);
  if (it != parsers_.end()) return it->second;
  return parse_generic_serp;
}

std::vector<SearchResult> parse_serp(std::string_view engine_id, std::string_view raw_html,
                                     std::string_view page_url) {
  auto results = SerpParserRegistry::instance().find(engine_id)(raw_html, page_url);
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].engine_id = std::string(engine_id);
    results[i].rank = static_cast<int>(i) + 1;
  }
  return results;
}

// -- adapters -------------------------------------------------------------------

std::string expand_url_template(std::string_view tmpl, std::string_view query_text, int count) {
  std::string out(tmpl);
  auto replace_all = [&out](std::string_view from, const std::string& to) {
    for (auto pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size()))
      out.replace(pos, from.size(), to);
  };
  replace_all("{query}", url_encode(query_text));
  replace_all("{count}", std::to_string(count));
  return out;
}

FixtureAdapter::FixtureAdapter(std::string id, std::filesystem::path dir,
                               std::chrono::milliseconds delay)
    : id_(std::move(id)), dir_(std::move(dir)), delay_(delay) {}

std::vector<SearchResult> FixtureAdapter::search(const QuerySpec& query, int k) {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  std::vector<SearchResult> results;
  auto ndjson = dir_ / (query.id + ".ndjson");
  auto html = dir_ / (query.id + ".html");
  if (std::filesystem::exists(ndjson)) {
    std::istringstream in(read_file(ndjson));
    std::string line;
    std::vector<std::pair<int, SearchResult>> ordered;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = json::parse(line);
        SearchResult r;
        r.url = j.at("url").get<std::string>();
        r.title = j.value("title", "");
        r.snippet = j.value("snippet", "");
        ordered.emplace_back(j.value("rank", static_cast<int>(ordered.size()) + 1), std::move(r));
      } catch (const json::exception& e) {
        throw SerpParseError(ndjson.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [rank, r] : ordered) results.push_back(std::move(r));
  } else if (std::filesystem::exists(html)) {
    results = parse_serp(id_, read_file(html));
  } else {
    throw SerpParseError("no fixture SERP for query '" + query.id + "' in " + dir_.string());
  }
  for (auto& r : results) {
    r.engine_id = id_;
    r.query_id = query.id;
  }
  assign_ranks(results, k);
  return results;
}

ApiAdapter::ApiAdapter(AdapterConfig config, std::shared_ptr<HttpClient> client)
    : config_(std::move(config)), client_(std::move(client)) {}

std::vector<SearchResult> ApiAdapter::search(const QuerySpec& query, int k) {
  auto url = expand_url_template(config_.url_template, query.text, k);
  auto fetched = fetch_following_redirects(*client_, url);
  if (!fetched.status || *fetched.status >= 500) throw TransportError(url + ": " + fetched.error);
  if (!fetched.ok()) throw SerpParseError(url + ": " + fetched.error);

  json body;
  try {
    body = json::parse(fetched.body);
  } catch (const json::exception& e) {
    throw SerpParseError("API response is not JSON: " + std::string(e.what()));
  }
  const json* items = find_path(body, config_.results_path);
  if (!items || !items->is_array())
    throw SerpParseError("API response has no array at '" + config_.results_path + "'");

  std::vector<SearchResult> results;
  for (const auto& item : *items) {
    SearchResult r;
    r.engine_id = config_.id;
    r.query_id = query.id;
    r.url = string_at(item, config_.url_field);
    if (r.url.empty())
      throw SerpParseError("API result #" + std::to_string(results.size() + 1) + " has no '" +
                           config_.url_field + "'");
    r.title = string_at(item, config_.title_field);
    r.snippet = string_at(item, config_.snippet_field);
    results.push_back(std::move(r));
  }
  assign_ranks(results, k);
  return results;
}

ScraperAdapter::ScraperAdapter(AdapterConfig config, std::shared_ptr<HttpClient> client)
    : config_(std::move(config)), client_(std::move(client)) {}

std::vector<SearchResult> ScraperAdapter::search(const QuerySpec& query, int k) {
  auto url = expand_url_template(config_.url_template, query.text, k);
  auto fetched = fetch_following_redirects(*client_, url);
  if (!fetched.status || *fetched.status >= 500) throw TransportError(url + ": " + fetched.error);
  if (!fetched.ok()) throw SerpParseError(url + ": " + fetched.error);
  auto results = parse_serp(config_.parser.empty() ? config_.id : config_.parser, fetched.body,
                            fetched.final_url);
  for (auto& r : results) {
    r.engine_id = config_.id;
    r.query_id = query.id;
  }
  assign_ranks(results, k);
  return results;
}

std::unique_ptr<EngineAdapter> make_adapter(const AdapterConfig& config,
                                            std::shared_ptr<HttpClient> client) {
  switch (config.mode) {
    case AdapterMode::Fixture:
      if (config.dir.empty()) throw ConfigError("fixture adapter '" + config.id + "' needs a dir");
      if (!std::filesystem::is_directory(config.dir))
        throw ConfigError("fixture adapter '" + config.id + "': no such directory " +
                          config.dir.string());
      return std::make_unique<FixtureAdapter>(config.id, config.dir, config.delay);
    case AdapterMode::Api:
      if (config.url_template.empty())
        throw ConfigError("api adapter '" + config.id + "' needs url_template");
      return std::make_unique<ApiAdapter>(config, std::move(client));
    case AdapterMode::ScraperPlugin:
      if (config.url_template.empty())
        throw ConfigError("scraper-plugin adapter '" + config.id + "' needs url_template");
      return std::make_unique<ScraperAdapter>(config, std::move(client));
  }
  throw ConfigError("adapter '" + config.id + "' has no mode");
}

// -- execution ------------------------------------------------------------------

SerpResponse execute_query(EngineAdapter& adapter, const QuerySpec& query, int k,
                           const RetryOptions& retry) {
  if (k < 1) throw ValidationError("result count k must be >= 1", "k");
  const int max_attempts = std::max(1, retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    auto start = std::chrono::steady_clock::now();
    try {
      auto results = adapter.search(query, k);
      auto stop = std::chrono::steady_clock::now();
      if (static_cast<int>(results.size()) > k) results.resize(static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].rank != static_cast<int>(i) + 1)
          throw SerpParseError("adapter '" + adapter.id() + "' returned non-contiguous ranks");
        if (!is_absolute_url(results[i].url))
          throw SerpParseError("adapter '" + adapter.id() + "' returned a non-absolute URL: " +
                               results[i].url);
        results[i].engine_id = adapter.id();
        results[i].query_id = query.id;
      }
      SerpResponse response;
      response.engine_id = adapter.id();
      response.query_id = query.id;
      response.results = std::move(results);
      response.elapsed_seconds = std::chrono::duration<double>(stop - start).count();
      response.attempts = attempt;
      return response;
    } catch (const TransportError& e) {
      if (attempt >= max_attempts)
        throw QueryError(adapter.id() + "/" + query.id + " failed after " +
                             std::to_string(attempt) + " attempts: " + e.what(),
                         attempt);
      std::this_thread::sleep_for(retry.backoff * attempt);
    }
  }
}

ProtocolSummary run_protocol(const RunManifest& manifest,
                             const std::map<std::string, EngineAdapter*>& adapters,
                             RunStore& store, HttpClient& client, const ProtocolOptions& options) {
  manifest.validate();
  for (const auto& engine : manifest.engines)
    if (!adapters.count(engine) || !adapters.at(engine))
      throw ConfigError("no adapter configured for engine '" + engine + "'");

  struct Job {
    const std::string* engine;
    const QuerySpec* query;
  };
  std::vector<Job> jobs;
  for (const auto& engine : manifest.engines)
    for (const auto& query : manifest.queries) jobs.push_back({&engine, &query});

  ProtocolSummary summary;
  summary.groups = jobs.size();
  std::mutex summary_mutex;
  std::vector<SearchResult> to_fetch;

  parallel_for_bounded(jobs.size(), options.max_in_flight, [&](std::size_t i) {
    const auto& job = jobs[i];
    SerpTiming timing{*job.engine, job.query->id, 0.0, 0, {}};
    try {
      auto response = execute_query(*adapters.at(*job.engine), *job.query,
                                    manifest.results_per_query, options.retry);
      timing.elapsed_seconds = response.elapsed_seconds;
      timing.result_count = static_cast<int>(response.results.size());
      store.record_timing(manifest.run_id, timing);
      std::lock_guard lock(summary_mutex);
      to_fetch.insert(to_fetch.end(), response.results.begin(), response.results.end());
    } catch (const Error& e) {
      timing.error = e.what();
      store.record_timing(manifest.run_id, timing);
      std::lock_guard lock(summary_mutex);
      summary.query_failures.push_back(*job.engine + "/" + job.query->id + ": " + e.what());
    }
  });

  HostRateLimiter limiter(options.host_interval);
  parallel_for_bounded(to_fetch.size(), options.max_in_flight, [&](std::size_t i) {
    const auto& result = to_fetch[i];
    Triplet triplet;
    triplet.engine_id = result.engine_id;
    triplet.query_id = result.query_id;
    triplet.rank = result.rank;
    triplet.url = result.url;
    triplet.title = result.title;
    triplet.snippet = result.snippet;

    bool fetched_ok = false;
    if (is_absolute_url(result.url)) {
      auto fetched = fetch_following_redirects(client, result.url, options.max_redirects, &limiter);
      triplet.http_status = fetched.status;
      if (fetched.ok()) {
        triplet.content = extract_text(fetched.body);
        store.store_raw_html(manifest.run_id, triplet, fetched.body);
        fetched_ok = true;
      }
    }
    triplet.fetched_at = now_utc_seconds();
    store.store_triplet(manifest.run_id, triplet);
    std::lock_guard lock(summary_mutex);
    ++summary.triplets;
    if (!fetched_ok) ++summary.fetch_failures;
  });

  std::sort(summary.query_failures.begin(), summary.query_failures.end());
  return summary;
}

}  // namespace serpeval
