#include "support/fixture_server.hpp"

#include <httplib.h>

#include <stdexcept>

namespace testsupport {

Reply page(std::string title, std::string body_text) {
  Reply r;
  r.body = "<!DOCTYPE html><html><head><title>" + title + "</title></head><body><p>" + body_text +
           "</p></body></html>";
  return r;
}

FixtureServer::FixtureServer() : server_(std::make_unique<httplib::Server>()) {
  server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    const Reply r = answer(req.path);
    if (r.delay.count() > 0) std::this_thread::sleep_for(r.delay);
    res.status = r.status;
    if (!r.location.empty()) res.set_header("Location", r.location);
    res.set_content(r.body, r.content_type);
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ < 0) throw std::runtime_error("fixture server: cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FixtureServer::~FixtureServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void FixtureServer::set(const std::string& path, Reply reply) { script(path, {std::move(reply)}); }

void FixtureServer::script(const std::string& path, std::vector<Reply> replies) {
  std::lock_guard lock(mutex_);
  scripts_[path] = std::move(replies);
  hits_[path] = 0;
}

void FixtureServer::fallback(std::function<std::optional<Reply>(const std::string&)> fn) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(fn);
}

std::string FixtureServer::url(const std::string& path) const {
  return "http://127.0.0.1:" + std::to_string(port_) + path;
}

int FixtureServer::hits(const std::string& path) const {
  std::lock_guard lock(mutex_);
  auto it = hits_.find(path);
  return it == hits_.end() ? 0 : it->second;
}

Reply FixtureServer::answer(const std::string& path) {
  std::function<std::optional<Reply>(const std::string&)> fallback;
  {
    std::lock_guard lock(mutex_);
    const int n = hits_[path]++;
    auto it = scripts_.find(path);
    if (it != scripts_.end() && !it->second.empty())
      return it->second[std::min<std::size_t>(static_cast<std::size_t>(n), it->second.size() - 1)];
    fallback = fallback_;
  }
  if (fallback)
    if (auto r = fallback(path)) return *r;
  Reply r = page("404 Not Found", "not found");
  r.status = 404;
  return r;
}

}  // namespace testsupport
