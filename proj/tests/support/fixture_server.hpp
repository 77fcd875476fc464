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

namespace httplib {
class Server;
}

namespace testsupport {

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "text/html; charset=utf-8";
  std::string location;
  std::chrono::milliseconds delay{0};
};

Reply page(std::string title, std::string body_text);

/// Local HTTP server on an ephemeral port. Paths answer from a static table,
/// a per-hit script (the last entry repeats), or a fallback generator; anything
/// else is a 404.
class FixtureServer {
 public:
  FixtureServer();
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  void set(const std::string& path, Reply reply);
  void script(const std::string& path, std::vector<Reply> replies);
  void fallback(std::function<std::optional<Reply>(const std::string& path)> fn);

  int port() const { return port_; }
  std::string url(const std::string& path) const;
  int hits(const std::string& path) const;

 private:
  Reply answer(const std::string& path);

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<Reply>> scripts_;
  std::map<std::string, int> hits_;
  std::function<std::optional<Reply>(const std::string&)> fallback_;
};

}  // namespace testsupport
