#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "serpeval/corpus.hpp"
#include "serpeval/judgments.hpp"
#include "serpeval/report.hpp"

namespace httplib {
class Server;
}

namespace serpeval {

struct ServiceOptions {
  bool blind = true;
  bool allow_skip = false;
  std::chrono::seconds token_ttl{8 * 3600};
  Weights weights;
  std::vector<int> levels = kDefaultLevels;
  std::size_t excerpt_chars = 1200;
  std::function<std::int64_t()> clock = now_utc_seconds;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Judgment sessions over HTTP+JSON under /api/v1/.
class JudgeService {
 public:
  JudgeService(std::filesystem::path root, ServiceOptions options = {});
  ~JudgeService();

  /// Transport-independent entry point; the HTTP server forwards here.
  ApiResponse handle(std::string_view method, std::string_view path,
                     std::string_view authorization, std::string_view body,
                     const std::map<std::string, std::string>& params = {});

  /// Binds and serves until stop(). Returns false when the bind fails.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  /// Groups of a run in the cursor order of `user_id`.
  std::vector<GroupKey> group_order(const RunManifest& manifest, std::string_view user_id) const;

 private:
  struct Token {
    std::string user_id;
    std::int64_t expires_at = 0;
  };
  struct Session {
    SessionSummary summary;
    std::size_t cursor = 0;
    std::vector<GroupKey> order;
  };

  ApiResponse do_register(const nlohmann::json& body);
  ApiResponse do_login(const nlohmann::json& body);
  ApiResponse do_next(const std::string& user_id, const std::string& run_id, bool skip);
  ApiResponse do_vote(const std::string& user_id, const std::string& run_id, const nlohmann::json& body);
  ApiResponse do_reports(const std::string& run_id);

  std::optional<std::string> authenticate(std::string_view authorization);
  std::shared_ptr<const LoadedRun> run(const std::string& run_id);
  Session& session(const std::string& user_id, const LoadedRun& run);
  std::size_t judged_in_group(const std::string& user_id, const std::string& run_id, const GroupKey& g) const;
  void advance(Session& s, const std::string& user_id, const LoadedRun& run);
  nlohmann::json group_payload(const Session& s, const LoadedRun& run, const std::string& user_id) const;
  static std::string handle_for(std::size_t index);

  std::filesystem::path root_;
  ServiceOptions options_;
  RunStore store_;
  ContextBase contexts_;

  std::mutex mutex_;
  std::map<std::string, Token> tokens_;
  std::map<std::string, std::shared_ptr<const LoadedRun>> runs_;
  std::map<std::pair<std::string, std::string>, Session> sessions_;  // (user, run)

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace serpeval
