#include "serpeval/judgments.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

namespace serpeval {

using nlohmann::json;

namespace {

constexpr int kPbkdf2Iterations = 60000;
constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kHashBytes = 32;

std::string random_bytes(std::size_t n) {
  std::string out(n, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(out.data()), static_cast<int>(n)) != 1)
    throw Error("RAND_bytes failed");
  return out;
}

std::string pbkdf2(std::string_view password, std::string_view salt, int iterations) {
  std::string out(kHashBytes, '\0');
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt.data()),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(),
                        static_cast<int>(kHashBytes),
                        reinterpret_cast<unsigned char*>(out.data())) != 1)
    throw Error("PBKDF2 failed");
  return out;
}

std::string from_hex(std::string_view hex) {
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<char>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

JudgmentKey key_of(const Judgment& j) { return {j.run_id, j.engine_id, j.query_id, j.rank}; }

json to_json_value(const StaticContext& c) {
  return json{{"user_id", c.user_id},
              {"connection", {{"email", c.connection.email}, {"password_hash", c.connection.password_hash}}},
              {"personal",
               {{"name", c.personal.name}, {"country", c.personal.country}, {"language", c.personal.language}}},
              {"interests", {{"domains", c.interests.domains}, {"specialty", c.interests.specialty}}},
              {"competence",
               {{"profession", c.competence.profession}, {"study_level", c.competence.study_level}}},
              {"created_at", c.created_at}};
}

StaticContext static_context_from_json(const json& j) {
  StaticContext c;
  c.user_id = j.at("user_id");
  c.connection.email = j.at("connection").at("email");
  c.connection.password_hash = j.at("connection").at("password_hash");
  const auto& p = j.at("personal");
  c.personal = {p.value("name", ""), p.value("country", ""), p.value("language", "")};
  const auto& i = j.at("interests");
  c.interests = {i.value("domains", ""), i.value("specialty", "")};
  const auto& k = j.at("competence");
  c.competence = {k.value("profession", ""), k.value("study_level", "")};
  c.created_at = j.value("created_at", std::int64_t{0});
  return c;
}

json to_json_value(const Judgment& j) {
  return json{{"type", "vote"},     {"user", j.user_id},  {"run", j.run_id},
              {"engine", j.engine_id}, {"query", j.query_id}, {"rank", j.rank},
              {"vote", j.vote},     {"voted_at", j.voted_at}};
}

}  // namespace

std::string hash_password(std::string_view password) {
  auto salt = random_bytes(kSaltBytes);
  return "pbkdf2-sha256$" + std::to_string(kPbkdf2Iterations) + "$" + to_hex(salt) + "$" +
         to_hex(pbkdf2(password, salt, kPbkdf2Iterations));
}

bool verify_password(std::string_view password, std::string_view stored) {
  std::array<std::string_view, 4> parts;
  for (std::size_t i = 0; i < 4; ++i) {
    auto sep = stored.find('$');
    if (i < 3 && sep == std::string_view::npos) return false;
    parts[i] = stored.substr(0, sep);
    stored = sep == std::string_view::npos ? std::string_view{} : stored.substr(sep + 1);
  }
  if (parts[0] != "pbkdf2-sha256") return false;
  int iterations = std::stoi(std::string(parts[1]));
  auto expected = from_hex(parts[3]);
  auto actual = pbkdf2(password, from_hex(parts[2]), iterations);
  return expected.size() == actual.size() &&
         CRYPTO_memcmp(expected.data(), actual.data(), actual.size()) == 0;
}

std::map<JudgmentKey, int> DynamicContext::replay() const {
  std::map<JudgmentKey, int> current;
  for (const auto& j : history) current[key_of(j)] = j.vote;
  return current;
}

// -- ContextBase ------------------------------------------------------------------------

ContextBase::ContextBase(std::filesystem::path dir) : dir_(std::move(dir)) { load(); }

void ContextBase::load() {
  std::error_code ec;
  auto users_dir = dir_ / "users";
  if (std::filesystem::is_directory(users_dir, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(users_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        auto c = static_context_from_json(json::parse(read_file(entry.path())));
        user_by_email_[lower_ascii(c.connection.email)] = c.user_id;
        users_[c.user_id] = std::move(c);
      } catch (const json::exception& e) {
        throw IoError("corrupt user record " + entry.path().string() + ": " + e.what());
      }
    }
  }
  auto log_dir = dir_ / "judgments";
  if (!std::filesystem::is_directory(log_dir, ec)) return;
  for (const auto& entry : std::filesystem::directory_iterator(log_dir)) {
    if (entry.path().extension() != ".ndjson") continue;
    std::string user_id = entry.path().stem().string();
    auto& context = dynamic_[user_id];
    context.user_id = user_id;
    std::istringstream in(read_file(entry.path()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;  // torn final append; earlier events are intact
      }
      if (j.value("type", "") == "vote") {
        Judgment judgment{j.at("user"), j.at("run"),  j.at("engine"),   j.at("query"),
                          j.at("rank"), j.at("vote"), j.at("voted_at")};
        current_[user_id][key_of(judgment)] = judgment;
        context.history.push_back(std::move(judgment));
      } else if (j.value("type", "") == "session") {
        context.sessions.push_back({j.at("session"), j.at("run"), j.at("opened_at"),
                                    j.at("closed_at"), j.at("judgments")});
      }
    }
  }
}

void ContextBase::append(std::string_view user_id, const std::string& line) {
  auto path = dir_ / "judgments" / (std::string(user_id) + ".ndjson");
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  out << line << '\n';
}

std::string ContextBase::register_user(const Registration& r) {
  auto at = r.email.find('@');
  if (r.email.empty() || at == std::string::npos || at == 0 || at + 1 == r.email.size())
    throw ValidationError("a valid e-mail is required", "connection.email");
  if (r.password.size() < 8)
    throw ValidationError("password must have at least 8 characters", "connection.password");

  StaticContext context;
  context.connection.email = r.email;
  context.connection.password_hash = hash_password(r.password);
  context.personal = r.personal;
  context.interests = r.interests;
  context.competence = r.competence;
  context.created_at = now_utc_seconds();

  std::lock_guard lock(mutex_);
  auto email = lower_ascii(r.email);
  if (user_by_email_.count(email)) throw DuplicateError("e-mail already registered");
  do {
    context.user_id = "u" + to_hex(random_bytes(6));
  } while (users_.count(context.user_id));
  write_file(dir_ / "users" / (context.user_id + ".json"), to_json_value(context).dump(2) + "\n");
  user_by_email_[email] = context.user_id;
  users_[context.user_id] = context;
  return context.user_id;
}

std::optional<StaticContext> ContextBase::authenticate(std::string_view email,
                                                       std::string_view password) const {
  std::optional<StaticContext> user;
  {
    std::lock_guard lock(mutex_);
    auto it = user_by_email_.find(lower_ascii(email));
    if (it != user_by_email_.end()) user = users_.at(it->second);
  }
  // Hash even for unknown e-mails so both failures cost the same.
  static const std::string kDummy = hash_password("dummy-password");
  bool ok = verify_password(password, user ? user->connection.password_hash : kDummy);
  if (!user || !ok) return std::nullopt;
  return user;
}

std::optional<StaticContext> ContextBase::find_user(std::string_view user_id) const {
  std::lock_guard lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

std::vector<StaticContext> ContextBase::users() const {
  std::lock_guard lock(mutex_);
  std::vector<StaticContext> out;
  for (const auto& [id, c] : users_) out.push_back(c);
  return out;
}

DynamicContext ContextBase::record_judgment(Judgment judgment, const LoadedRun& run) {
  if (judgment.vote < kMinVote || judgment.vote > kMaxVote)
    throw ValidationError("vote must be between 0 and 5", "vote");
  if (judgment.run_id != run.manifest.run_id)
    throw NotFoundError("unknown run '" + judgment.run_id + "'");
  const auto* group = run.group({judgment.engine_id, judgment.query_id});
  if (!group || std::none_of(group->begin(), group->end(),
                             [&](const Triplet& t) { return t.rank == judgment.rank; }))
    throw NotFoundError("unknown result " + judgment.engine_id + "/" + judgment.query_id + "/" +
                        std::to_string(judgment.rank));
  if (judgment.voted_at == 0) judgment.voted_at = now_utc_seconds();

  std::lock_guard lock(mutex_);
  if (!users_.count(judgment.user_id)) throw NotFoundError("unknown user '" + judgment.user_id + "'");
  append(judgment.user_id, to_json_value(judgment).dump());
  auto& context = dynamic_[judgment.user_id];
  context.user_id = judgment.user_id;
  context.history.push_back(judgment);
  current_[judgment.user_id][key_of(judgment)] = judgment;
  return context;
}

void ContextBase::record_session(std::string_view user_id, const SessionSummary& s) {
  std::lock_guard lock(mutex_);
  json j{{"type", "session"},       {"session", s.session_id}, {"run", s.run_id},
         {"opened_at", s.opened_at}, {"closed_at", s.closed_at}, {"judgments", s.judgments}};
  append(user_id, j.dump());
  auto& context = dynamic_[std::string(user_id)];
  context.user_id = std::string(user_id);
  context.sessions.push_back(s);
}

DynamicContext ContextBase::dynamic_context(std::string_view user_id) const {
  std::lock_guard lock(mutex_);
  auto it = dynamic_.find(user_id);
  if (it == dynamic_.end()) return DynamicContext{std::string(user_id), {}, {}};
  return it->second;
}

std::vector<Judgment> ContextBase::current_judgments(std::string_view run_id) const {
  std::lock_guard lock(mutex_);
  std::vector<Judgment> out;
  for (const auto& [user, judgments] : current_)
    for (const auto& [key, j] : judgments)
      if (j.run_id == run_id) out.push_back(j);
  return out;
}

// -- aggregates -------------------------------------------------------------------------

std::map<int, int> ContextBase::group_votes(std::string_view user_id, std::string_view run_id,
                                            std::string_view engine_id,
                                            std::string_view query_id) const {
  std::lock_guard lock(mutex_);
  std::map<int, int> out;
  auto user = current_.find(user_id);
  if (user == current_.end()) return out;
  const JudgmentKey first{std::string(run_id), std::string(engine_id), std::string(query_id), 0};
  for (auto it = user->second.lower_bound(first); it != user->second.end(); ++it) {
    const auto& [run, engine, query, rank] = it->first;
    if (run != run_id || engine != engine_id || query != query_id) break;
    out[rank] = it->second.vote;
  }
  return out;
}

RecallAtK r_at_k(const std::map<int, double>& value_by_rank, int k) {
  if (k < 1) throw ValidationError("k must be >= 1", "k");
  RecallAtK out;
  out.k = k;
  double sum = 0.0;
  for (const auto& [rank, value] : value_by_rank) {
    if (rank < 1 || rank > k) continue;
    sum += value;
    ++out.covered;
  }
  if (out.covered > 0) out.value = sum / static_cast<double>(out.covered);
  return out;
}

std::map<int, double> mean_votes_by_rank(std::span<const Judgment> judgments,
                                         std::string_view engine_id, std::string_view query_id) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& j : judgments) {
    if (j.engine_id != engine_id || j.query_id != query_id) continue;
    acc[j.rank].first += j.vote;
    acc[j.rank].second += 1;
  }
  std::map<int, double> out;
  for (const auto& [rank, a] : acc) out[rank] = a.first / static_cast<double>(a.second);
  return out;
}

std::vector<AdjustedScore> recompute_relevance(std::span<const Judgment> judgments,
                                               std::span<const RelevanceScore> scores,
                                               std::string_view engine_id,
                                               std::string_view query_id) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& s : scores) {
    if (s.query_id != query_id) continue;
    if (!any) lo = hi = s.weight;
    any = true;
    lo = std::min(lo, s.weight);
    hi = std::max(hi, s.weight);
  }

  std::map<int, AdjustedScore> by_rank;
  for (const auto& s : scores) {
    if (s.engine_id != engine_id || s.query_id != query_id) continue;
    AdjustedScore a;
    a.rank = s.rank;
    a.url = s.url;
    a.value = hi > lo ? (s.weight - lo) / (hi - lo) : 0.5;
    by_rank[s.rank] = a;
  }
  std::map<int, std::size_t> counts;
  for (const auto& j : judgments)
    if (j.engine_id == engine_id && j.query_id == query_id) ++counts[j.rank];
  for (const auto& [rank, mean] : mean_votes_by_rank(judgments, engine_id, query_id)) {
    auto& a = by_rank[rank];
    a.rank = rank;
    a.value = mean / static_cast<double>(kMaxVote);
    a.voted = true;
    a.votes = counts[rank];
  }
  std::vector<AdjustedScore> out;
  for (auto& [rank, a] : by_rank) out.push_back(std::move(a));
  return out;
}

}  // namespace serpeval
