#include "serpeval/http.hpp"

#include <set>
#include <thread>

#include <httplib.h>

#include "serpeval/url.hpp"

namespace serpeval {

HttpResponse HttplibClient::get(const std::string& url_text) {
  auto url = parse_absolute_url(url_text);
  if (!url) throw TransportError("not an absolute URL: " + url_text);
  if (url->scheme != "http" && url->scheme != "https")
    throw TransportError("unsupported scheme: " + url->scheme);

  httplib::Client client(url->origin());
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_follow_location(false);
  client.enable_server_certificate_verification(false);

  httplib::Headers headers = {{"User-Agent", "serpeval/0.1"}};
  auto result = client.Get(url->request_target(), headers);
  if (!result) throw TransportError(httplib::to_string(result.error()) + " (" + url_text + ")");

  HttpResponse response;
  response.status = result->status;
  response.body = std::move(result->body);
  response.location = result->get_header_value("Location");
  response.content_type = result->get_header_value("Content-Type");
  return response;
}

void HostRateLimiter::acquire(std::string_view host) {
  if (min_interval_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    auto it = next_slot_.find(host);
    if (it == next_slot_.end()) it = next_slot_.emplace(std::string(host), now).first;
    slot = std::max(it->second, now);
    it->second = slot + min_interval_;
  }
  std::this_thread::sleep_until(slot);
}

FetchResult fetch_following_redirects(HttpClient& client, const std::string& url,
                                      int max_redirects, HostRateLimiter* limiter) {
  FetchResult result;
  result.final_url = url;
  std::set<std::string> visited;
  std::string current = url;
  for (;;) {
    if (!visited.insert(current).second) {
      result.error = "redirect loop at " + current;
      return result;
    }
    if (limiter) {
      if (auto parsed = parse_absolute_url(current)) limiter->acquire(parsed->host);
    }
    HttpResponse response;
    try {
      response = client.get(current);
    } catch (const TransportError& e) {
      result.status.reset();
      result.error = e.what();
      return result;
    }
    result.status = response.status;
    result.final_url = current;
    bool redirect = response.status >= 300 && response.status < 400 && !response.location.empty();
    if (!redirect) {
      result.body = std::move(response.body);
      result.content_type = std::move(response.content_type);
      if (response.status >= 400) result.error = "HTTP " + std::to_string(response.status);
      return result;
    }
    if (result.redirects >= max_redirects) {
      result.error = "too many redirects";
      return result;
    }
    auto next = resolve_url(current, response.location);
    if (!next) {
      result.error = "bad redirect location: " + response.location;
      return result;
    }
    ++result.redirects;
    current = *next;
  }
}

}  // namespace serpeval
