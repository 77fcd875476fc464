#include <gtest/gtest.h>

#include <fstream>

#include "serpeval/engines.hpp"
#include "support/fixture_server.hpp"
#include "support/synthetic.hpp"

using namespace serpeval;
using testsupport::FixtureServer;
using testsupport::Reply;

namespace {

const char* kSerp = R"(<html><head><base href="https://engine.example/search/"></head><body>
<div class="header"><a href="/ads">Ad</a></div>
<ol class="results">
  <li class="result"><h3><a href="https://one.example/a">First   result</a></h3>
      <div class="snippet">About <b>first</b></div></li>
  <li class="result"><a href="../two">Second</a></li>
  <li class="result"><a href="https://three.example/">Third</a><p class="snippet">third</p></li>
</ol>
<a href="https://footer.example/">footer</a>
</body></html>)";

QuerySpec query(std::string id = "q1", std::string text = "solar wind") {
  return {std::move(id), "t1", std::move(text), false};
}

class FlakyAdapter final : public EngineAdapter {
 public:
  explicit FlakyAdapter(int failures) : failures_(failures) {}
  const std::string& id() const override { return id_; }
  AdapterMode mode() const override { return AdapterMode::Fixture; }
  std::vector<SearchResult> search(const QuerySpec& q, int) override {
    ++calls;
    if (calls <= failures_) throw TransportError("connection reset");
    return {{id_, q.id, 1, "https://ok.example/", "ok", ""}};
  }
  int calls = 0;

 private:
  std::string id_ = "flaky";
  int failures_;
};

}  // namespace

TEST(ParseGenericSerp, ExtractsOrganicResults) {
  auto results = parse_generic_serp(kSerp, "https://ignored.example/");
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].url, "https://one.example/a");
  EXPECT_EQ(results[0].title, "First result");
  EXPECT_EQ(results[0].snippet, "About first");
  EXPECT_EQ(results[1].url, "https://engine.example/two");
  EXPECT_EQ(results[1].snippet, "");
  EXPECT_EQ(results[2].title, "Third");
}

TEST(ParseGenericSerp, NamesMissingStructure) {
  try {
    parse_generic_serp("<html><body><p>nothing</p></body></html>", "https://e.example/");
    FAIL();
  } catch (const SerpParseError& e) {
    EXPECT_NE(std::string(e.what()).find("results"), std::string::npos);
  }
  try {
    parse_generic_serp(R"(<div class="results"><div class="result">no link</div></div>)",
                       "https://e.example/");
    FAIL();
  } catch (const SerpParseError& e) {
    EXPECT_NE(std::string(e.what()).find("a[href]"), std::string::npos);
  }
}

TEST(SerpParserRegistry, EngineSpecificParserWins) {
  SerpParserRegistry::instance().add("custom-engine", [](std::string_view, std::string_view) {
    return std::vector<SearchResult>{{"", "", 0, "https://custom.example/", "c", ""}};
  });
  EXPECT_EQ(parse_serp("custom-engine", "<html/>").at(0).url, "https://custom.example/");
  EXPECT_EQ(parse_serp("other-engine", kSerp).size(), 3u);
}

TEST(AdapterMode, ParsesKnownModes) {
  EXPECT_EQ(parse_adapter_mode("fixture"), AdapterMode::Fixture);
  EXPECT_EQ(parse_adapter_mode("api"), AdapterMode::Api);
  EXPECT_EQ(parse_adapter_mode("scraper-plugin"), AdapterMode::ScraperPlugin);
  EXPECT_EQ(to_string(AdapterMode::ScraperPlugin), "scraper-plugin");
  EXPECT_THROW(parse_adapter_mode("telepathy"), ConfigError);
}

TEST(ExpandUrlTemplate, EncodesQuery) {
  EXPECT_EQ(expand_url_template("http://h/s?q={query}&n={count}", "a b&c", 20),
            "http://h/s?q=a+b%26c&n=20");
}

TEST(FixtureAdapter, ReadsNdjsonAndTruncatesToK) {
  auto dir = testsupport::temp_dir("fixture");
  {
    std::ofstream out(dir / "q1.ndjson");
    out << R"({"rank":2,"url":"https://b.example/","title":"B"})" << '\n'
        << R"({"rank":1,"url":"https://a.example/","title":"A","snippet":"s"})" << '\n'
        << R"({"rank":3,"url":"https://c.example/"})" << '\n';
  }
  FixtureAdapter adapter("ea", dir);
  auto results = adapter.search(query(), 2);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].url, "https://a.example/");
  EXPECT_EQ(results[0].rank, 1);
  EXPECT_EQ(results[1].rank, 2);
  EXPECT_EQ(results[1].engine_id, "ea");
  EXPECT_THROW(adapter.search(query("q9"), 2), SerpParseError);
  std::filesystem::remove_all(dir);
}

TEST(FixtureAdapter, ReadsHtmlSerp) {
  auto dir = testsupport::temp_dir("fixture-html");
  {
    std::ofstream out(dir / "q1.html");
    out << kSerp;
  }
  FixtureAdapter adapter("eb", dir);
  EXPECT_EQ(adapter.search(query(), 20).size(), 3u);
  std::filesystem::remove_all(dir);
}

TEST(ApiAdapter, MapsFieldPaths) {
  FixtureServer server;
  Reply reply;
  reply.content_type = "application/json";
  reply.body = R"({"data":{"items":[
      {"link":{"href":"https://x.example/1"},"name":"One","text":"s1"},
      {"link":{"href":"https://x.example/2"},"name":"Two"}]}})";
  server.set("/api", reply);
  AdapterConfig config;
  config.id = "api";
  config.mode = AdapterMode::Api;
  config.url_template = server.url("/api?q={query}&n={count}");
  config.results_path = "data.items";
  config.url_field = "link.href";
  config.title_field = "name";
  config.snippet_field = "text";
  auto adapter = make_adapter(config, std::make_shared<HttplibClient>());
  auto results = adapter->search(query(), 10);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[1].url, "https://x.example/2");
  EXPECT_EQ(results[0].snippet, "s1");
  EXPECT_EQ(results[1].snippet, "");
}

TEST(ApiAdapter, ShapeMismatchIsParseError) {
  FixtureServer server;
  Reply reply;
  reply.body = R"({"other":[]})";
  server.set("/api", reply);
  AdapterConfig config;
  config.id = "api";
  config.mode = AdapterMode::Api;
  config.url_template = server.url("/api?q={query}");
  auto adapter = make_adapter(config, std::make_shared<HttplibClient>());
  EXPECT_THROW(adapter->search(query(), 10), SerpParseError);
}

TEST(ScraperAdapter, FetchesAndParsesMarkup) {
  FixtureServer server;
  Reply reply;
  reply.body = R"(<div class="results"><div class="result"><a href="/local">L</a></div></div>)";
  server.set("/search", reply);
  AdapterConfig config;
  config.id = "scraper";
  config.mode = AdapterMode::ScraperPlugin;
  config.url_template = server.url("/search?q={query}");
  auto adapter = make_adapter(config, std::make_shared<HttplibClient>());
  auto results = adapter->search(query(), 10);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].url, server.url("/local"));
}

TEST(MakeAdapter, RejectsIncompleteConfig) {
  AdapterConfig config;
  config.id = "x";
  config.mode = AdapterMode::Api;
  EXPECT_THROW(make_adapter(config, nullptr), ConfigError);
  config.mode = AdapterMode::Fixture;
  config.dir = "/nonexistent/serpeval";
  EXPECT_THROW(make_adapter(config, nullptr), ConfigError);
}

TEST(ExecuteQuery, RetriesTransportFailures) {
  FlakyAdapter adapter(2);
  auto response = execute_query(adapter, query(), 5, {3, std::chrono::milliseconds(1)});
  EXPECT_EQ(response.attempts, 3);
  EXPECT_EQ(response.results.size(), 1u);
  EXPECT_GE(response.elapsed_seconds, 0.0);
}

TEST(ExecuteQuery, GivesUpAfterMaxAttempts) {
  FlakyAdapter adapter(10);
  try {
    execute_query(adapter, query(), 5, {3, std::chrono::milliseconds(1)});
    FAIL();
  } catch (const QueryError& e) {
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_EQ(adapter.calls, 3);
  }
}

TEST(RunProtocol, StoresOneTripletPerResult) {
  FixtureServer server;
  server.set("/p/1", testsupport::page("One", "solar wind speed"));
  server.set("/p/2", testsupport::page("Two", "wind"));
  auto dir = testsupport::temp_dir("protocol");
  std::filesystem::create_directories(dir / "fx");
  {
    std::ofstream out(dir / "fx" / "q1.ndjson");
    out << nlohmann::json{{"url", server.url("/p/1")}}.dump() << '\n'
        << nlohmann::json{{"url", server.url("/p/2")}}.dump() << '\n'
        << nlohmann::json{{"url", server.url("/gone")}}.dump() << '\n';
  }
  RunManifest manifest;
  manifest.run_id = "r";
  manifest.engines = {"ea", "eb"};
  manifest.topics = {{"t1", "Topic"}};
  manifest.queries = {query()};
  manifest.results_per_query = 3;
  RunStore store(dir / "data");
  store.create_run(manifest);

  FixtureAdapter ea("ea", dir / "fx");
  FixtureAdapter eb("eb", dir / "missing");
  HttplibClient client;
  ProtocolOptions options;
  options.host_interval = std::chrono::milliseconds(0);
  options.retry.backoff = std::chrono::milliseconds(1);
  auto summary = run_protocol(manifest, {{"ea", &ea}, {"eb", &eb}}, store, client, options);

  EXPECT_EQ(summary.groups, 2u);
  EXPECT_EQ(summary.triplets, 3u);
  EXPECT_EQ(summary.fetch_failures, 1u);
  ASSERT_EQ(summary.query_failures.size(), 1u);
  EXPECT_EQ(summary.query_failures[0].rfind("eb/q1", 0), 0u);

  auto run = store.load_run("r");
  const auto* group = run.group({"ea", "q1"});
  ASSERT_NE(group, nullptr);
  ASSERT_EQ(group->size(), 3u);
  EXPECT_EQ((*group)[0].content, "One solar wind speed");
  EXPECT_EQ((*group)[2].http_status, 404);
  EXPECT_FALSE((*group)[2].content.has_value());
  EXPECT_TRUE(store.load_raw_html("r", (*group)[0]).has_value());
  EXPECT_EQ(run.timings.size(), 2u);
  std::filesystem::remove_all(dir);
}
