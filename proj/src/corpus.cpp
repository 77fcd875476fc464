#include "serpeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "serpeval/extraction.hpp"
#include "serpeval/url.hpp"

namespace serpeval {

using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest";
constexpr const char* kTripletFile = "triplets.ndjson";
constexpr const char* kTimingFile = "responses.ndjson";

bool safe_component(std::string_view s) {
  return !s.empty() && s != "." && s != ".." &&
         s.find_first_of("/\\ \t\r\n") == std::string_view::npos;
}

void require_component(std::string_view value, const char* field) {
  if (!safe_component(value))
    throw ValidationError(std::string("invalid ") + field + ": '" + std::string(value) + "'",
                          field);
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

std::vector<std::string> QuerySpec::words() const { return tokenize(text); }

const QuerySpec* RunManifest::find_query(std::string_view id) const {
  auto it = std::find_if(queries.begin(), queries.end(), [&](auto& q) { return q.id == id; });
  return it == queries.end() ? nullptr : &*it;
}

const Topic* RunManifest::find_topic(std::string_view id) const {
  auto it = std::find_if(topics.begin(), topics.end(), [&](auto& t) { return t.id == id; });
  return it == topics.end() ? nullptr : &*it;
}

void RunManifest::validate() const {
  require_component(run_id, "run_id");
  if (results_per_query < 1) throw ValidationError("results_per_query must be >= 1", "results_per_query");
  std::set<std::string_view> seen;
  for (const auto& engine : engines) {
    require_component(engine, "engine");
    if (std::any_of(engine.begin(), engine.end(), [](unsigned char c) { return std::isupper(c); }))
      throw ValidationError("engine id must be lowercase: " + engine, "engine");
    if (!seen.insert(engine).second) throw ValidationError("duplicate engine " + engine, "engine");
  }
  seen.clear();
  for (const auto& topic : topics) {
    require_component(topic.id, "topic");
    if (topic.label.empty()) throw ValidationError("topic " + topic.id + " has no label", "topic");
    if (!seen.insert(topic.id).second) throw ValidationError("duplicate topic " + topic.id, "topic");
  }
  seen.clear();
  for (const auto& query : queries) {
    require_component(query.id, "query");
    if (!seen.insert(query.id).second) throw ValidationError("duplicate query " + query.id, "query");
    if (!find_topic(query.topic_id))
      throw ValidationError("query " + query.id + " references unknown topic " + query.topic_id,
                            "query");
    if (query.words().empty())
      throw ValidationError("query " + query.id + " has no words", "query");
  }
}

std::size_t LoadedRun::triplet_count() const {
  std::size_t n = 0;
  for (const auto& [key, group] : groups) n += group.size();
  return n;
}

const std::vector<Triplet>* LoadedRun::group(const GroupKey& key) const {
  auto it = groups.find(key);
  return it == groups.end() ? nullptr : &it->second;
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::DuplicateRank: return "duplicate-rank";
    case Violation::Kind::MissingRank: return "missing-rank";
    case Violation::Kind::CountMismatch: return "count-mismatch";
    case Violation::Kind::UnknownGroup: return "unknown-group";
  }
  return "unknown";
}

std::string triplet_key(std::string_view run_id, const Triplet& t) {
  return std::string(run_id) + "/" + t.engine_id + "/" + t.query_id + "/" + std::to_string(t.rank);
}

std::vector<Violation> validate_triplets(const RunManifest& manifest,
                                         std::span<const Triplet> triplets) {
  std::map<GroupKey, std::vector<int>> ranks;
  for (const auto& t : triplets) ranks[{t.engine_id, t.query_id}].push_back(t.rank);

  std::vector<Violation> out;
  auto check_group = [&](const GroupKey& key, std::vector<int> group) {
    std::sort(group.begin(), group.end());
    for (std::size_t i = 1; i < group.size(); ++i)
      if (group[i] == group[i - 1] && (i < 2 || group[i - 2] != group[i]))
        out.push_back({Violation::Kind::DuplicateRank, key, "rank " + std::to_string(group[i])});
    if (!group.empty()) {
      std::set<int> present(group.begin(), group.end());
      for (int r = 1; r < group.back(); ++r)
        if (!present.count(r))
          out.push_back({Violation::Kind::MissingRank, key, "rank " + std::to_string(r)});
    }
    if (group.size() != static_cast<std::size_t>(manifest.results_per_query))
      out.push_back({Violation::Kind::CountMismatch, key,
                     std::to_string(group.size()) + " of " +
                         std::to_string(manifest.results_per_query) + " results"});
  };

  for (const auto& engine : manifest.engines) {
    for (const auto& query : manifest.queries) {
      GroupKey key{engine, query.id};
      auto it = ranks.find(key);
      check_group(key, it == ranks.end() ? std::vector<int>{} : it->second);
      if (it != ranks.end()) ranks.erase(it);
    }
  }
  for (const auto& [key, group] : ranks)
    out.push_back({Violation::Kind::UnknownGroup, key, std::to_string(group.size()) + " records"});
  return out;
}

// -- json -------------------------------------------------------------------

void to_json(json& j, const Topic& t) { j = json{{"id", t.id}, {"label", t.label}}; }
void from_json(const json& j, Topic& t) {
  j.at("id").get_to(t.id);
  j.at("label").get_to(t.label);
}

void to_json(json& j, const QuerySpec& q) {
  j = json{{"id", q.id}, {"topic", q.topic_id}, {"text", q.text}, {"exact", q.exact_mode}};
}
void from_json(const json& j, QuerySpec& q) {
  j.at("id").get_to(q.id);
  j.at("topic").get_to(q.topic_id);
  j.at("text").get_to(q.text);
  q.exact_mode = j.value("exact", false);
}

void to_json(json& j, const Triplet& t) {
  j = json{{"engine", t.engine_id},   {"query", t.query_id}, {"rank", t.rank},
           {"url", t.url},            {"title", t.title},    {"snippet", t.snippet},
           {"content", nullptr},      {"fetched_at", t.fetched_at},
           {"http_status", nullptr}};
  if (t.content) j["content"] = *t.content;
  if (t.http_status) j["http_status"] = *t.http_status;
}
void from_json(const json& j, Triplet& t) {
  j.at("engine").get_to(t.engine_id);
  j.at("query").get_to(t.query_id);
  j.at("rank").get_to(t.rank);
  j.at("url").get_to(t.url);
  t.title = j.value("title", "");
  t.snippet = j.value("snippet", "");
  t.content = optional_field<std::string>(j, "content");
  t.fetched_at = j.at("fetched_at").get<std::int64_t>();
  t.http_status = optional_field<int>(j, "http_status");
}

void to_json(json& j, const RunManifest& m) {
  j = json{{"run_id", m.run_id},
           {"engines", m.engines},
           {"topics", m.topics},
           {"queries", m.queries},
           {"results_per_query", m.results_per_query},
           {"created_at", m.created_at}};
}
void from_json(const json& j, RunManifest& m) {
  j.at("run_id").get_to(m.run_id);
  j.at("engines").get_to(m.engines);
  j.at("topics").get_to(m.topics);
  j.at("queries").get_to(m.queries);
  m.results_per_query = j.value("results_per_query", 20);
  m.created_at = j.value("created_at", std::int64_t{0});
}

void to_json(json& j, const SerpTiming& t) {
  j = json{{"engine", t.engine_id},
           {"query", t.query_id},
           {"elapsed_s", t.elapsed_seconds},
           {"results", t.result_count},
           {"error", t.error}};
}
void from_json(const json& j, SerpTiming& t) {
  j.at("engine").get_to(t.engine_id);
  j.at("query").get_to(t.query_id);
  j.at("elapsed_s").get_to(t.elapsed_seconds);
  t.result_count = j.value("results", 0);
  t.error = j.value("error", "");
}

// -- files --------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// -- RunStore -----------------------------------------------------------------

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path RunStore::run_dir(std::string_view run_id) const { return root_ / run_id; }

bool RunStore::exists(std::string_view run_id) const {
  return safe_component(run_id) && std::filesystem::exists(run_dir(run_id) / kManifestFile);
}

void RunStore::create_run(const RunManifest& manifest, bool overwrite) {
  manifest.validate();
  std::lock_guard lock(run_mutex(manifest.run_id));
  auto dir = run_dir(manifest.run_id);
  if (std::filesystem::exists(dir / kManifestFile)) {
    if (!overwrite) throw Error("run '" + manifest.run_id + "' already exists (use --force)", 2);
    std::filesystem::remove_all(dir);
  }
  write_file(dir / kManifestFile, json(manifest).dump(2) + "\n");
}

RunManifest RunStore::load_manifest(std::string_view run_id) const {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + std::string(run_id) + "'");
  try {
    return json::parse(read_file(run_dir(run_id) / kManifestFile)).get<RunManifest>();
  } catch (const json::exception& e) {
    throw IoError("corrupt manifest for run '" + std::string(run_id) + "': " + e.what());
  }
}

std::mutex& RunStore::run_mutex(std::string_view run_id) {
  std::lock_guard lock(registry_mutex_);
  auto it = run_mutexes_.find(run_id);
  if (it == run_mutexes_.end())
    it = run_mutexes_.emplace(std::string(run_id), std::make_unique<std::mutex>()).first;
  return *it->second;
}

void RunStore::append_line(std::string_view run_id, const std::string& file,
                           const std::string& line) {
  std::lock_guard lock(run_mutex(run_id));
  auto path = run_dir(run_id) / file;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  out << line << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

std::string RunStore::store_triplet(std::string_view run_id, const Triplet& triplet) {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + std::string(run_id) + "'");
  require_component(triplet.engine_id, "engine");
  require_component(triplet.query_id, "query");
  if (triplet.rank < 1) throw ValidationError("rank must be >= 1", "rank");
  if (!is_absolute_url(triplet.url)) throw ValidationError("malformed URL: " + triplet.url, "url");
  append_line(run_id, kTripletFile, json(triplet).dump());
  return triplet_key(run_id, triplet);
}

void RunStore::store_raw_html(std::string_view run_id, const Triplet& t, std::string_view html) {
  write_file(run_dir(run_id) / "raw" / t.engine_id / t.query_id / (std::to_string(t.rank) + ".html"),
             html);
}

std::optional<std::string> RunStore::load_raw_html(std::string_view run_id,
                                                   const Triplet& t) const {
  auto path =
      run_dir(run_id) / "raw" / t.engine_id / t.query_id / (std::to_string(t.rank) + ".html");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

void RunStore::record_timing(std::string_view run_id, const SerpTiming& timing) {
  if (!exists(run_id)) throw NotFoundError("unknown run '" + std::string(run_id) + "'");
  append_line(run_id, kTimingFile, json(timing).dump());
}

namespace {

// Calls `on_record` for every parsed line, collecting unparsable ones.
template <typename T, typename F>
void scan_ndjson(const std::filesystem::path& path, std::vector<CorruptRecord>& corruption,
                 F&& on_record) {
  if (!std::filesystem::exists(path)) return;
  std::string data = read_file(path);
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset < data.size()) {
    auto end = data.find('\n', offset);
    bool terminated = end != std::string::npos;
    if (!terminated) end = data.size();
    ++line_no;
    std::string_view line(data.data() + offset, end - offset);
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        on_record(json::parse(line).get<T>());
      } catch (const std::exception& e) {
        std::string message = e.what();
        if (!terminated) message = "truncated record: " + message;
        corruption.push_back({line_no, offset, path.filename().string() + ": " + message});
      }
    }
    offset = end + 1;
  }
}

}  // namespace

LoadedRun RunStore::load_run(std::string_view run_id) const {
  LoadedRun run;
  run.manifest = load_manifest(run_id);
  auto dir = run_dir(run_id);

  std::map<std::tuple<std::string, std::string, int>, Triplet> latest;
  scan_ndjson<Triplet>(dir / kTripletFile, run.corruption, [&](Triplet t) {
    auto key = std::make_tuple(t.engine_id, t.query_id, t.rank);
    latest.insert_or_assign(std::move(key), std::move(t));
  });
  for (auto& [key, t] : latest) run.groups[{t.engine_id, t.query_id}].push_back(std::move(t));
  // std::map ordering already sorts each group by rank.

  std::map<GroupKey, SerpTiming> timings;
  scan_ndjson<SerpTiming>(dir / kTimingFile, run.corruption, [&](SerpTiming t) {
    GroupKey key{t.engine_id, t.query_id};
    timings.insert_or_assign(std::move(key), std::move(t));
  });
  for (auto& [key, t] : timings) run.timings.push_back(std::move(t));

  for (const auto& engine : run.manifest.engines) {
    for (const auto& query : run.manifest.queries) {
      GroupKey key{engine, query.id};
      std::set<int> present;
      if (auto* g = run.group(key))
        for (const auto& t : *g) present.insert(t.rank);
      Gap gap{key, {}};
      for (int r = 1; r <= run.manifest.results_per_query; ++r)
        if (!present.count(r)) gap.missing_ranks.push_back(r);
      if (!gap.missing_ranks.empty()) run.gaps.push_back(std::move(gap));
    }
  }
  return run;
}

std::vector<Violation> RunStore::validate_run(std::string_view run_id) const {
  auto run = load_run(run_id);
  std::vector<Triplet> all;
  all.reserve(run.triplet_count());
  for (const auto& [key, group] : run.groups) all.insert(all.end(), group.begin(), group.end());
  return validate_triplets(run.manifest, all);
}

}  // namespace serpeval
