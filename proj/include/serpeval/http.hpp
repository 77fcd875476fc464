#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "serpeval/common.hpp"

namespace serpeval {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string location;
  std::string content_type;
};

/// Connection-level failure: refused, timed out, TLS error, bad URL.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(what, 4) {}
};

/// One GET without following redirects. Implementations must be safe to
/// call from several threads at once.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

/// cpp-httplib backed client; a fresh connection per request.
class HttplibClient final : public HttpClient {
 public:
  explicit HttplibClient(std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : timeout_(timeout) {}
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::milliseconds timeout_;
};

/// Enforces a minimum gap between requests to the same host.
class HostRateLimiter {
 public:
  explicit HostRateLimiter(std::chrono::milliseconds min_interval) : min_interval_(min_interval) {}
  void acquire(std::string_view host);

 private:
  std::chrono::milliseconds min_interval_;
  std::mutex mutex_;
  std::map<std::string, std::chrono::steady_clock::time_point, std::less<>> next_slot_;
};

struct FetchResult {
  std::optional<int> status;  // absent on transport failure
  std::string body;
  std::string final_url;
  std::string content_type;
  std::string error;  // empty on success
  int redirects = 0;

  bool ok() const { return error.empty() && status && *status >= 200 && *status < 400; }
};

/// GET with bounded redirect following. Loops and chains longer than
/// `max_redirects` fail with an error; HTTP >= 400 sets `error` too.
FetchResult fetch_following_redirects(HttpClient& client, const std::string& url,
                                      int max_redirects = 5, HostRateLimiter* limiter = nullptr);

}  // namespace serpeval
