#include <gtest/gtest.h>

#include "serpeval/http.hpp"
#include "support/fixture_server.hpp"

using namespace serpeval;
using testsupport::FixtureServer;
using testsupport::Reply;

namespace {

Reply redirect_to(const std::string& location, int status = 302) {
  Reply r;
  r.status = status;
  r.location = location;
  return r;
}

}  // namespace

TEST(Fetch, ReturnsBodyAndStatus) {
  FixtureServer server;
  server.set("/hello", testsupport::page("Hi", "hello world"));
  HttplibClient client;
  auto r = fetch_following_redirects(client, server.url("/hello"));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.status, 200);
  EXPECT_NE(r.body.find("hello world"), std::string::npos);
  EXPECT_EQ(r.redirects, 0);
  EXPECT_EQ(r.final_url, server.url("/hello"));
}

TEST(Fetch, FollowsRelativeAndAbsoluteRedirects) {
  FixtureServer server;
  server.set("/a", redirect_to("/b", 301));
  server.set("/b", redirect_to(server.url("/c")));
  server.set("/c", testsupport::page("C", "end"));
  HttplibClient client;
  auto r = fetch_following_redirects(client, server.url("/a"));
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.redirects, 2);
  EXPECT_EQ(r.final_url, server.url("/c"));
}

TEST(Fetch, RedirectLoopFails) {
  FixtureServer server;
  server.set("/x", redirect_to("/y"));
  server.set("/y", redirect_to("/x"));
  HttplibClient client;
  auto r = fetch_following_redirects(client, server.url("/x"));
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.error.find("loop"), std::string::npos) << r.error;
}

TEST(Fetch, TooManyRedirectsFails) {
  FixtureServer server;
  for (int i = 0; i < 7; ++i) server.set("/r" + std::to_string(i), redirect_to("/r" + std::to_string(i + 1)));
  server.set("/r7", testsupport::page("end", "end"));
  HttplibClient client;
  EXPECT_FALSE(fetch_following_redirects(client, server.url("/r0"), 5).ok());
  EXPECT_TRUE(fetch_following_redirects(client, server.url("/r0"), 7).ok());
}

TEST(Fetch, ClientErrorIsNotOk) {
  FixtureServer server;
  HttplibClient client;
  auto r = fetch_following_redirects(client, server.url("/missing"));
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.status, 404);
}

TEST(Fetch, TransportFailureHasNoStatus) {
  int port = 0;
  {
    FixtureServer gone;
    port = gone.port();
  }
  HttplibClient client(std::chrono::milliseconds(500));
  auto r = fetch_following_redirects(client, "http://127.0.0.1:" + std::to_string(port) + "/");
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.status.has_value());
  EXPECT_FALSE(r.error.empty());
}

TEST(HostRateLimiter, SpacesRequestsToOneHost) {
  HostRateLimiter limiter(std::chrono::milliseconds(30));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 3; ++i) limiter.acquire("example.com");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(60));
}

TEST(HostRateLimiter, HostsAreIndependent) {
  HostRateLimiter limiter(std::chrono::milliseconds(200));
  const auto start = std::chrono::steady_clock::now();
  limiter.acquire("a.example");
  limiter.acquire("b.example");
  limiter.acquire("c.example");
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(150));
}
