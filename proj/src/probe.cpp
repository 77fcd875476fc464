#include "serpeval/probe.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "serpeval/extraction.hpp"
#include "serpeval/url.hpp"

namespace serpeval {

using nlohmann::json;

std::string_view to_string(LinkState state) {
  switch (state) {
    case LinkState::Alive: return "alive";
    case LinkState::Dead: return "dead";
    case LinkState::SuspectSoft404: return "suspect-soft-404";
  }
  return "alive";
}

LinkState parse_link_state(std::string_view text) {
  if (text == "alive") return LinkState::Alive;
  if (text == "dead") return LinkState::Dead;
  if (text == "suspect-soft-404") return LinkState::SuspectSoft404;
  throw ValidationError("unknown link state '" + std::string(text) + "'", "state");
}

std::string_view to_string(RedundancyLevel level) {
  return level == RedundancyLevel::ExactUrl ? "exact-url" : "same-site";
}

RedundancyLevel parse_redundancy_level(std::string_view text) {
  if (text == "exact-url") return RedundancyLevel::ExactUrl;
  if (text == "same-site") return RedundancyLevel::SameSite;
  throw ConfigError("unknown redundancy level '" + std::string(text) + "'");
}

namespace {

bool looks_like_soft_404(std::string_view body, const std::vector<std::string>& phrases) {
  if (phrases.empty()) return false;
  std::string title;
  bool in_title = false;
  for (const auto& t : lex_html(body)) {
    if (t.kind == HtmlToken::Kind::StartTag && t.name == "title") in_title = true;
    else if (t.kind == HtmlToken::Kind::EndTag && t.name == "title") break;
    else if (in_title && t.kind == HtmlToken::Kind::Text) title += t.text;
  }
  std::string text = extract_text(body);
  if (text.size() > 500) text.resize(500);
  std::string haystack = case_fold(title) + "\n" + case_fold(text);
  return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& phrase) {
    return !phrase.empty() && haystack.find(case_fold(phrase)) != std::string::npos;
  });
}

}  // namespace

LinkStatus check_link(const std::string& url, const RetryPolicy& policy, HttpClient& client,
                      HostRateLimiter* limiter) {
  LinkStatus status;
  status.url = url;
  const int max_attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    status.attempts = attempt;
    auto fetched = fetch_following_redirects(client, url, policy.max_redirects, limiter);
    status.final_http_status = fetched.status;
    status.checked_at = now_utc_seconds();
    if (fetched.ok()) {
      status.error.clear();
      status.state = looks_like_soft_404(fetched.body, policy.soft404_phrases)
                         ? LinkState::SuspectSoft404
                         : LinkState::Alive;
      return status;
    }
    status.error = fetched.error;
    if (attempt < max_attempts && policy.retry_delay.count() > 0)
      std::this_thread::sleep_for(policy.retry_delay);
  }
  status.state = LinkState::Dead;
  return status;
}

// -- redundancy -------------------------------------------------------------------

std::string redundancy_key(std::string_view url, RedundancyLevel level) {
  auto parsed = parse_absolute_url(url);
  if (!parsed) return std::string(url);
  if (level == RedundancyLevel::SameSite) return registrable_domain(parsed->host);
  return normalize_url(url);
}

RedundancyResult detect_redundant(std::span<const SearchResult> results, RedundancyLevel level) {
  // Positions sorted by rank so the representative is the lowest rank whatever
  // the input order.
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].rank < results[b].rank; });

  std::unordered_map<std::string, std::size_t> first_seen;  // key -> group slot
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t pos : order) {
    auto key = redundancy_key(results[pos].url, level);
    auto [it, inserted] = first_seen.emplace(key, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(pos);
  }

  RedundancyResult out;
  out.redundant.assign(results.size(), false);
  for (const auto& group : members) {
    if (group.size() < 2) continue;
    RedundancyGroup g;
    g.level = level;
    g.representative_url = results[group.front()].url;
    for (std::size_t pos : group) {
      g.member_urls.push_back(results[pos].url);
      g.member_ranks.push_back(results[pos].rank);
    }
    for (std::size_t i = 1; i < group.size(); ++i) out.redundant[group[i]] = true;
    out.redundant_count += group.size() - 1;
    out.groups.push_back(std::move(g));
  }
  return out;
}

// -- parasites --------------------------------------------------------------------

bool detect_parasite(std::span<const std::string> query_words,
                     std::span<const std::string> content_tokens) {
  return std::none_of(query_words.begin(), query_words.end(), [&](const std::string& word) {
    return std::find(content_tokens.begin(), content_tokens.end(), word) != content_tokens.end();
  });
}

ParasiteCheck classify_parasite(const QuerySpec& query, const Triplet& triplet,
                                const ParasiteOptions& options) {
  ParasiteCheck check;
  if (!options.host_blocklist.empty()) {
    if (auto url = parse_absolute_url(triplet.url)) {
      std::string host = case_fold(url->host);
      for (const auto& blocked : options.host_blocklist) {
        std::string b = case_fold(blocked);
        if (host == b || (host.size() > b.size() && host.ends_with("." + b))) {
          check.blocklisted = true;
          check.parasite = true;
        }
      }
    }
  }
  if (!triplet.content) {
    check.scorable = false;
    return check;
  }
  if (!check.parasite) {
    auto words = query.words();
    auto tokens = tokenize(*triplet.content);
    check.parasite = detect_parasite(words, tokens);
  }
  return check;
}

// -- report -----------------------------------------------------------------------

const EngineProbe* ProbeReport::engine(std::string_view id) const {
  auto it = std::find_if(engines.begin(), engines.end(), [&](auto& e) { return e.engine_id == id; });
  return it == engines.end() ? nullptr : &*it;
}

ProbeReport score_performance(const LoadedRun& run, const std::map<LinkKey, LinkStatus>& statuses,
                              const ProbeOptions& options) {
  ProbeReport report;
  report.level = options.redundancy;

  for (const auto& [key, triplets] : run.groups) {
    const QuerySpec* query = run.manifest.find_query(key.query_id);
    GroupProbe group;
    group.group = key;

    std::vector<SearchResult> results;
    results.reserve(triplets.size());
    for (const auto& t : triplets)
      results.push_back({t.engine_id, t.query_id, t.rank, t.url, t.title, t.snippet});
    auto redundancy = detect_redundant(results, options.redundancy);
    group.redundancy_groups = redundancy.groups;

    for (std::size_t i = 0; i < triplets.size(); ++i) {
      const auto& t = triplets[i];
      LinkRecord link;
      link.engine_id = t.engine_id;
      link.query_id = t.query_id;
      link.rank = t.rank;
      if (auto it = statuses.find({t.engine_id, t.query_id, t.rank}); it != statuses.end()) {
        link.status = it->second;
      } else {
        link.status.url = t.url;
        link.status.final_http_status = t.http_status;
      }
      if (query) link.parasite = classify_parasite(*query, t, options.parasites);
      link.redundant = redundancy.redundant[i];

      ++group.analyzed_count;
      if (link.status.state == LinkState::Dead) ++group.dead_count;
      if (link.status.state == LinkState::SuspectSoft404) ++group.suspect_count;
      if (link.parasite.parasite) ++group.parasite_count;
      if (!link.parasite.scorable) ++group.unscorable_count;
      report.links.push_back(std::move(link));
    }
    group.redundant_count = redundancy.redundant_count;
    group.redundancy_note = group.analyzed_count - group.redundant_count;
    report.groups.push_back(std::move(group));
  }

  for (const auto& engine_id : run.manifest.engines) {
    EngineProbe e;
    e.engine_id = engine_id;
    for (const auto& g : report.groups) {
      if (g.group.engine_id != engine_id) continue;
      e.analyzed += g.analyzed_count;
      e.dead += g.dead_count;
      e.parasites += g.parasite_count;
      e.redundant += g.redundant_count;
      e.suspect += g.suspect_count;
    }
    if (e.analyzed > 0) {
      double n = static_cast<double>(e.analyzed);
      e.dead_rate = 100.0 * static_cast<double>(e.dead) / n;
      e.parasite_rate = 100.0 * static_cast<double>(e.parasites) / n;
      e.redundancy_rate = 100.0 * static_cast<double>(e.redundant) / n;
    }
    double total = 0.0;
    for (const auto& timing : run.timings) {
      if (timing.engine_id != engine_id || !timing.error.empty()) continue;
      total += timing.elapsed_seconds;
      ++e.timed_queries;
    }
    if (e.timed_queries > 0) e.avg_response_time = total / static_cast<double>(e.timed_queries);
    report.engines.push_back(std::move(e));
  }
  return report;
}

ProbeReport probe_run(const LoadedRun& run, HttpClient& client, const ProbeOptions& options) {
  std::vector<const Triplet*> triplets;
  for (const auto& [key, group] : run.groups)
    for (const auto& t : group) triplets.push_back(&t);

  std::vector<LinkStatus> results(triplets.size());
  HostRateLimiter limiter(options.host_interval);
  parallel_for_bounded(triplets.size(), options.max_in_flight, [&](std::size_t i) {
    results[i] = check_link(triplets[i]->url, options.retry, client, &limiter);
  });

  std::map<LinkKey, LinkStatus> statuses;
  for (std::size_t i = 0; i < triplets.size(); ++i)
    statuses.emplace(LinkKey{triplets[i]->engine_id, triplets[i]->query_id, triplets[i]->rank},
                     std::move(results[i]));
  return score_performance(run, statuses, options);
}

// -- serialization ----------------------------------------------------------------

namespace {

json to_json_value(const RedundancyGroup& g) {
  return json{{"representative", g.representative_url},
              {"members", g.member_urls},
              {"ranks", g.member_ranks},
              {"level", to_string(g.level)}};
}

}  // namespace

std::string to_ndjson(const ProbeReport& report) {
  std::ostringstream out;
  for (const auto& l : report.links) {
    json j{{"type", "link"},
           {"engine", l.engine_id},
           {"query", l.query_id},
           {"rank", l.rank},
           {"url", l.status.url},
           {"state", to_string(l.status.state)},
           {"attempts", l.status.attempts},
           {"http_status", nullptr},
           {"checked_at", l.status.checked_at},
           {"error", l.status.error},
           {"dead_note", l.status.note()},
           {"parasite", l.parasite.parasite},
           {"scorable", l.parasite.scorable},
           {"blocklisted", l.parasite.blocklisted},
           {"redundant", l.redundant}};
    if (l.status.final_http_status) j["http_status"] = *l.status.final_http_status;
    out << j.dump() << '\n';
  }
  for (const auto& g : report.groups) {
    json groups = json::array();
    for (const auto& rg : g.redundancy_groups) groups.push_back(to_json_value(rg));
    json j{{"type", "group"},
           {"engine", g.group.engine_id},
           {"query", g.group.query_id},
           {"analyzed", g.analyzed_count},
           {"dead", g.dead_count},
           {"redundant", g.redundant_count},
           {"parasites", g.parasite_count},
           {"suspect", g.suspect_count},
           {"unscorable", g.unscorable_count},
           {"redundancy_note", g.redundancy_note},
           {"redundancy_groups", groups}};
    out << j.dump() << '\n';
  }
  for (const auto& e : report.engines) {
    json j{{"type", "engine"},
           {"engine", e.engine_id},
           {"level", to_string(report.level)},
           {"analyzed", e.analyzed},
           {"dead", e.dead},
           {"parasites", e.parasites},
           {"redundant", e.redundant},
           {"suspect", e.suspect},
           {"dead_rate", e.dead_rate},
           {"parasite_rate", e.parasite_rate},
           {"redundancy_rate", e.redundancy_rate},
           {"avg_response_time", e.avg_response_time},
           {"timed_queries", e.timed_queries}};
    out << j.dump() << '\n';
  }
  return out.str();
}

ProbeReport probe_report_from_ndjson(std::string_view text) {
  ProbeReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      auto type = j.at("type").get<std::string>();
      if (type == "link") {
        LinkRecord l;
        l.engine_id = j.at("engine");
        l.query_id = j.at("query");
        l.rank = j.at("rank");
        l.status.url = j.at("url");
        l.status.state = parse_link_state(j.at("state").get<std::string>());
        l.status.attempts = j.at("attempts");
        if (!j.at("http_status").is_null()) l.status.final_http_status = j.at("http_status").get<int>();
        l.status.checked_at = j.at("checked_at");
        l.status.error = j.value("error", "");
        l.parasite.parasite = j.at("parasite");
        l.parasite.scorable = j.at("scorable");
        l.parasite.blocklisted = j.value("blocklisted", false);
        l.redundant = j.at("redundant");
        report.links.push_back(std::move(l));
      } else if (type == "group") {
        GroupProbe g;
        g.group = {j.at("engine"), j.at("query")};
        g.analyzed_count = j.at("analyzed");
        g.dead_count = j.at("dead");
        g.redundant_count = j.at("redundant");
        g.parasite_count = j.at("parasites");
        g.suspect_count = j.at("suspect");
        g.unscorable_count = j.at("unscorable");
        g.redundancy_note = j.at("redundancy_note");
        for (const auto& rg : j.at("redundancy_groups")) {
          RedundancyGroup group;
          group.representative_url = rg.at("representative");
          group.member_urls = rg.at("members").get<std::vector<std::string>>();
          group.member_ranks = rg.at("ranks").get<std::vector<int>>();
          group.level = parse_redundancy_level(rg.at("level").get<std::string>());
          g.redundancy_groups.push_back(std::move(group));
        }
        report.groups.push_back(std::move(g));
      } else if (type == "engine") {
        EngineProbe e;
        e.engine_id = j.at("engine");
        report.level = parse_redundancy_level(j.at("level").get<std::string>());
        e.analyzed = j.at("analyzed");
        e.dead = j.at("dead");
        e.parasites = j.at("parasites");
        e.redundant = j.at("redundant");
        e.suspect = j.at("suspect");
        e.dead_rate = j.at("dead_rate");
        e.parasite_rate = j.at("parasite_rate");
        e.redundancy_rate = j.at("redundancy_rate");
        e.avg_response_time = j.at("avg_response_time");
        e.timed_queries = j.at("timed_queries");
        report.engines.push_back(std::move(e));
      }
    } catch (const std::exception& e) {
      throw IoError("probe_report.ndjson line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace serpeval
