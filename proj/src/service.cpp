#include "serpeval/service.hpp"

#include <httplib.h>
#include <openssl/rand.h>

#include <cstdio>
#include <random>

#include "serpeval/pipeline.hpp"

namespace serpeval {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string code, std::string message, std::string field = {}) {
  json body{{"code", std::move(code)}, {"message", std::move(message)}};
  if (!field.empty()) body["field"] = std::move(field);
  return {status, std::move(body)};
}

std::string random_token(std::size_t bytes) {
  std::string raw(bytes, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(raw.data()), static_cast<int>(raw.size())) != 1)
    throw Error("RAND_bytes failed");
  return to_hex(raw);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.push_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

std::string excerpt(const std::optional<std::string>& content, std::size_t chars) {
  if (!content) return {};
  std::size_t pos = 0, n = 0;
  while (pos < content->size() && n < chars) {
    utf8::next(*content, pos);
    ++n;
  }
  return content->substr(0, pos);
}

// Optional string field inside a registration category.
std::string category_field(const json& category, const std::string& name, const std::string& field) {
  auto it = category.find(field);
  if (it == category.end() || it->is_null()) return {};
  if (!it->is_string()) throw ValidationError(name + "." + field + " must be a string", name + "." + field);
  return it->get<std::string>();
}

}  // namespace

JudgeService::JudgeService(std::filesystem::path root, ServiceOptions options)
    : root_(std::move(root)),
      options_(std::move(options)),
      store_(root_),
      contexts_(contexts_dir(root_)) {}

JudgeService::~JudgeService() { stop(); }

std::string JudgeService::handle_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "grp-%04zu", index + 1);
  return buf;
}

std::vector<GroupKey> JudgeService::group_order(const RunManifest& manifest,
                                                std::string_view user_id) const {
  std::mt19937_64 rng(fnv1a(user_id));
  std::vector<GroupKey> order;
  for (const auto& topic : manifest.topics) {
    for (const auto& query : manifest.queries) {
      if (query.topic_id != topic.id) continue;
      std::vector<std::string> engines = manifest.engines;
      // Fisher-Yates with an explicit draw so the order is the same on every
      // standard library.
      for (std::size_t i = engines.size(); i > 1; --i)
        std::swap(engines[i - 1], engines[rng() % i]);
      for (auto& e : engines) order.push_back({std::move(e), query.id});
    }
  }
  return order;
}

ApiResponse JudgeService::handle(std::string_view method, std::string_view path,
                                 std::string_view authorization, std::string_view body,
                                 const std::map<std::string, std::string>& params) {
  const auto parts = split_path(path);
  if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1")
    return error(404, "not_found", "no such endpoint");

  json payload;
  if (method == "POST") {
    payload = json::parse(body, nullptr, false);
    if (payload.is_discarded() || !payload.is_object())
      return error(400, "bad_request", "request body must be a JSON object");
  }

  try {
    if (parts.size() == 3 && parts[2] == "register") {
      if (method != "POST") return error(405, "method_not_allowed", "use POST");
      return do_register(payload);
    }
    if (parts.size() == 3 && parts[2] == "login") {
      if (method != "POST") return error(405, "method_not_allowed", "use POST");
      return do_login(payload);
    }
    if (parts.size() == 5 && parts[2] == "runs") {
      const auto user = authenticate(authorization);
      if (!user) return error(401, "unauthorized", "missing, invalid or expired token");
      const std::string run_id(parts[3]);
      if (!store_.exists(run_id)) return error(404, "unknown_run", "unknown run '" + run_id + "'");
      const auto action = parts[4];
      if (action == "next" && method == "GET") {
        auto skip = params.find("skip");
        return do_next(*user, run_id, skip != params.end() && (skip->second == "1" || skip->second == "true"));
      }
      if (action == "votes" && method == "POST") return do_vote(*user, run_id, payload);
      if (action == "reports" && method == "GET") return do_reports(run_id);
    }
    return error(404, "not_found", "no such endpoint");
  } catch (const ValidationError& e) {
    return error(422, "validation", e.what(), e.field());
  } catch (const NotFoundError& e) {
    return error(404, "not_found", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

ApiResponse JudgeService::do_register(const json& body) {
  Registration r;
  for (const char* category : {"connection", "personal", "interests", "competence"}) {
    auto it = body.find(category);
    if (it == body.end() || !it->is_object())
      return error(422, "validation", std::string("missing category '") + category + "'", category);
  }
  const auto& connection = body["connection"];
  r.email = category_field(connection, "connection", "email");
  r.password = category_field(connection, "connection", "password");
  const auto& personal = body["personal"];
  r.personal = {category_field(personal, "personal", "name"),
                category_field(personal, "personal", "country"),
                category_field(personal, "personal", "language")};
  const auto& interests = body["interests"];
  r.interests = {category_field(interests, "interests", "domains"),
                 category_field(interests, "interests", "specialty")};
  const auto& competence = body["competence"];
  r.competence = {category_field(competence, "competence", "profession"),
                  category_field(competence, "competence", "study_level")};
  try {
    const auto user_id = contexts_.register_user(r);
    return {201, json{{"user_id", user_id}}};
  } catch (const DuplicateError& e) {
    return error(409, "duplicate", e.what(), "connection.email");
  }
}

ApiResponse JudgeService::do_login(const json& body) {
  auto email = body.find("email");
  auto password = body.find("password");
  if (email == body.end() || !email->is_string())
    return error(422, "validation", "email is required", "email");
  if (password == body.end() || !password->is_string())
    return error(422, "validation", "password is required", "password");
  const auto user = contexts_.authenticate(email->get<std::string>(), password->get<std::string>());
  if (!user) return error(401, "unauthorized", "invalid email or password");

  const auto token = random_token(32);
  const auto expires_at = options_.clock() + options_.token_ttl.count();
  {
    std::lock_guard lock(mutex_);
    tokens_[token] = {user->user_id, expires_at};
  }
  return {200, json{{"token", token}, {"user_id", user->user_id}, {"expires_at", expires_at}}};
}

std::optional<std::string> JudgeService::authenticate(std::string_view authorization) {
  constexpr std::string_view prefix = "Bearer ";
  if (!authorization.starts_with(prefix)) return std::nullopt;
  const std::string token(authorization.substr(prefix.size()));
  std::lock_guard lock(mutex_);
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  if (options_.clock() >= it->second.expires_at) {
    tokens_.erase(it);
    return std::nullopt;
  }
  return it->second.user_id;
}

std::shared_ptr<const LoadedRun> JudgeService::run(const std::string& run_id) {
  std::lock_guard lock(mutex_);
  auto it = runs_.find(run_id);
  if (it != runs_.end()) return it->second;
  auto loaded = std::make_shared<const LoadedRun>(store_.load_run(run_id));
  runs_[run_id] = loaded;
  return loaded;
}

JudgeService::Session& JudgeService::session(const std::string& user_id, const LoadedRun& run) {
  auto key = std::make_pair(user_id, run.manifest.run_id);
  auto it = sessions_.find(key);
  if (it != sessions_.end()) return it->second;
  Session s;
  s.summary.session_id = "s" + random_token(8);
  s.summary.run_id = run.manifest.run_id;
  s.summary.opened_at = options_.clock();
  s.order = group_order(run.manifest, user_id);
  return sessions_.emplace(std::move(key), std::move(s)).first->second;
}

std::size_t JudgeService::judged_in_group(const std::string& user_id, const std::string& run_id,
                                          const GroupKey& g) const {
  return contexts_.group_votes(user_id, run_id, g.engine_id, g.query_id).size();
}

void JudgeService::advance(Session& s, const std::string& user_id, const LoadedRun& run) {
  while (s.cursor < s.order.size()) {
    const auto* group = run.group(s.order[s.cursor]);
    if (group && judged_in_group(user_id, run.manifest.run_id, s.order[s.cursor]) < group->size()) break;
    ++s.cursor;
  }
}

json JudgeService::group_payload(const Session& s, const LoadedRun& run,
                                 const std::string& user_id) const {
  const auto& key = s.order[s.cursor];
  const auto* query = run.manifest.find_query(key.query_id);
  const auto* topic = query ? run.manifest.find_topic(query->topic_id) : nullptr;
  const auto votes = contexts_.group_votes(user_id, run.manifest.run_id, key.engine_id, key.query_id);

  json results = json::array();
  std::size_t total = 0;
  if (const auto* group = run.group(key)) {
    total = group->size();
    for (const auto& t : *group) {
      json r{{"rank", t.rank},
             {"title", t.title},
             {"url", t.url},
             {"snippet", t.snippet},
             {"excerpt", excerpt(t.content, options_.excerpt_chars)}};
      if (auto v = votes.find(t.rank); v != votes.end()) r["vote"] = v->second;
      results.push_back(std::move(r));
    }
  }
  json out{{"complete", false},
           {"session", s.summary.session_id},
           {"group", handle_for(s.cursor)},
           {"position", s.cursor + 1},
           {"groups", s.order.size()},
           {"topic", topic ? json{{"id", topic->id}, {"label", topic->label}} : json()},
           {"query", query ? json{{"id", query->id}, {"text", query->text}} : json()},
           {"results", std::move(results)},
           {"progress",
            {{"judged", votes.size()},
             {"total", total},
             {"fraction", total ? static_cast<double>(votes.size()) / static_cast<double>(total) : 0.0}}}};
  if (!options_.blind) out["engine"] = key.engine_id;
  return out;
}

ApiResponse JudgeService::do_next(const std::string& user_id, const std::string& run_id, bool skip) {
  const auto loaded = run(run_id);
  std::lock_guard lock(mutex_);
  Session& s = session(user_id, *loaded);
  if (skip) {
    if (!options_.allow_skip)
      return error(409, "skip_disabled", "groups must be completed in order", "skip");
    if (s.cursor < s.order.size()) ++s.cursor;
  }
  advance(s, user_id, *loaded);
  if (s.cursor >= s.order.size()) {
    if (s.summary.closed_at == 0) {
      s.summary.closed_at = options_.clock();
      contexts_.record_session(user_id, s.summary);
    }
    return {200, json{{"complete", true},
                      {"session", s.summary.session_id},
                      {"groups", s.order.size()},
                      {"results", json::array()}}};
  }
  return {200, group_payload(s, *loaded, user_id)};
}

ApiResponse JudgeService::do_vote(const std::string& user_id, const std::string& run_id,
                                  const json& body) {
  auto group = body.find("group");
  auto rank = body.find("rank");
  auto vote = body.find("vote");
  if (group == body.end() || !group->is_string())
    return error(422, "validation", "group handle is required", "group");
  if (rank == body.end() || !rank->is_number_integer())
    return error(422, "validation", "rank must be an integer", "rank");
  if (vote == body.end() || !vote->is_number_integer())
    return error(422, "validation", "vote must be an integer between 0 and 5", "vote");
  const auto v = vote->get<std::int64_t>();
  if (v < kMinVote || v > kMaxVote)
    return error(422, "validation", "vote must be between 0 and 5", "vote");

  const auto loaded = run(run_id);
  std::lock_guard lock(mutex_);
  auto it = sessions_.find({user_id, run_id});
  if (it == sessions_.end() || it->second.summary.closed_at != 0)
    return error(409, "no_session", "no open session on this run; request /next first");
  Session& s = it->second;

  const auto handle = group->get<std::string>();
  std::size_t index = s.order.size();
  unsigned parsed = 0;
  if (std::sscanf(handle.c_str(), "grp-%u", &parsed) == 1 && parsed >= 1 && handle == handle_for(parsed - 1))
    index = parsed - 1;
  if (index >= s.order.size()) return error(422, "validation", "unknown group '" + handle + "'", "group");
  if (!options_.allow_skip && index != s.cursor)
    return error(409, "outside_current_group", "result is outside the current group", "group");

  const auto& key = s.order[index];
  const auto* results = loaded->group(key);
  const auto r = rank->get<std::int64_t>();
  if (!results || std::none_of(results->begin(), results->end(), [&](const Triplet& t) { return t.rank == r; }))
    return error(422, "validation", "rank " + std::to_string(r) + " is not in group " + handle, "rank");

  Judgment j;
  j.user_id = user_id;
  j.run_id = run_id;
  j.engine_id = key.engine_id;
  j.query_id = key.query_id;
  j.rank = static_cast<int>(r);
  j.vote = static_cast<int>(v);
  j.voted_at = options_.clock();
  contexts_.record_judgment(j, *loaded);
  ++s.summary.judgments;

  const auto judged = judged_in_group(user_id, run_id, key);
  const auto total = results->size();
  return {200, json{{"group", handle},
                    {"rank", j.rank},
                    {"vote", j.vote},
                    {"group_complete", judged == total},
                    {"progress",
                     {{"judged", judged},
                      {"total", total},
                      {"fraction", static_cast<double>(judged) / static_cast<double>(total)}}}}};
}

ApiResponse JudgeService::do_reports(const std::string& run_id) {
  ReportBundle bundle = build_reports(store_, contexts_, run_id, options_.weights, options_.levels);
  auto table_or_null = [](const std::optional<Table>& t) { return t ? to_json_value(*t) : json(); };
  json out{{"run", run_id},
           {"tables",
            {{"performance", table_or_null(bundle.performance)},
             {"user", to_json_value(bundle.user)},
             {"query", table_or_null(bundle.query)},
             {"final", table_or_null(bundle.final_table)}}},
           {"missing", bundle.missing}};
  if (bundle.coupling_error) out["coupling_error"] = *bundle.coupling_error;
  return {200, std::move(out)};
}

namespace {

void forward(JudgeService& service, const httplib::Request& req, httplib::Response& res) {
  std::map<std::string, std::string> params;
  for (const auto& [k, v] : req.params) params[k] = v;
  const auto r = service.handle(req.method, req.path, req.get_header_value("Authorization"), req.body, params);
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

bool JudgeService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto fn = [this](const httplib::Request& req, httplib::Response& res) { forward(*this, req, res); };
  server_->Get(R"(/api/v1/.*)", fn);
  server_->Post(R"(/api/v1/.*)", fn);
  return server_->listen(host, port);
}

int JudgeService::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  auto fn = [this](const httplib::Request& req, httplib::Response& res) { forward(*this, req, res); };
  server_->Get(R"(/api/v1/.*)", fn);
  server_->Post(R"(/api/v1/.*)", fn);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void JudgeService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace serpeval
