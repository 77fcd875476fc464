#include <gtest/gtest.h>

#include "serpeval/common.hpp"
#include "serpeval/url.hpp"

using namespace serpeval;

TEST(ParseUrl, SplitsComponents) {
  auto u = parse_absolute_url("https://user@Example.com:8443/a/b?x=1#frag");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->scheme, "https");
  EXPECT_EQ(u->userinfo, "user");
  EXPECT_EQ(u->host, "Example.com");
  EXPECT_EQ(u->port, 8443);
  EXPECT_EQ(u->path, "/a/b");
  EXPECT_EQ(u->query, "x=1");
  EXPECT_EQ(u->fragment, "frag");
  EXPECT_EQ(u->request_target(), "/a/b?x=1");
}

TEST(ParseUrl, RejectsMalformed) {
  EXPECT_FALSE(parse_absolute_url("not a url"));
  EXPECT_FALSE(parse_absolute_url("/relative/path"));
  EXPECT_FALSE(parse_absolute_url("http://"));
  EXPECT_FALSE(parse_absolute_url("http://exa mple.com/"));
  EXPECT_FALSE(parse_absolute_url("http://example.com:99999/"));
  EXPECT_FALSE(is_absolute_url("mailto:someone@example.com"));
  EXPECT_TRUE(is_absolute_url("http://example.com"));
}

TEST(ParseUrl, EmptyPathTargetsRoot) {
  auto u = parse_absolute_url("http://example.com");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->request_target(), "/");
}

struct ResolveCase {
  const char* ref;
  const char* expected;
};

class ResolveReference : public ::testing::TestWithParam<ResolveCase> {};

TEST_P(ResolveReference, MatchesReferenceResolution) {
  const auto& c = GetParam();
  auto resolved = resolve_url("http://a/b/c/d;p?q", c.ref);
  ASSERT_TRUE(resolved) << c.ref;
  EXPECT_EQ(*resolved, c.expected) << c.ref;
}

INSTANTIATE_TEST_SUITE_P(
    NormalExamples, ResolveReference,
    ::testing::Values(ResolveCase{"g", "http://a/b/c/g"}, ResolveCase{"./g", "http://a/b/c/g"},
                      ResolveCase{"g/", "http://a/b/c/g/"}, ResolveCase{"/g", "http://a/g"},
                      ResolveCase{"?y", "http://a/b/c/d;p?y"}, ResolveCase{"g?y", "http://a/b/c/g?y"},
                      ResolveCase{"#s", "http://a/b/c/d;p?q#s"}, ResolveCase{"g#s", "http://a/b/c/g#s"},
                      ResolveCase{";x", "http://a/b/c/;x"}, ResolveCase{"", "http://a/b/c/d;p?q"},
                      ResolveCase{".", "http://a/b/c/"}, ResolveCase{"./", "http://a/b/c/"},
                      ResolveCase{"..", "http://a/b/"}, ResolveCase{"../g", "http://a/b/g"},
                      ResolveCase{"../..", "http://a/"}, ResolveCase{"../../g", "http://a/g"},
                      ResolveCase{"../../../g", "http://a/g"}, ResolveCase{"/./g", "http://a/g"},
                      ResolveCase{"g.", "http://a/b/c/g."}, ResolveCase{"g/../h", "http://a/b/c/h"},
                      ResolveCase{"http://other/x", "http://other/x"}));

TEST(ResolveUrl, NetworkPathReference) {
  auto r = resolve_url("https://a/b", "//cdn.example/lib.js");
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, "https://cdn.example/lib.js");
}

TEST(NormalizeUrl, CanonicalizesEquivalentForms) {
  const std::string canonical = normalize_url("http://example.com/page");
  EXPECT_EQ(normalize_url("HTTP://EXAMPLE.COM/page"), canonical);
  EXPECT_EQ(normalize_url("http://example.com:80/page"), canonical);
  EXPECT_EQ(normalize_url("http://example.com/page/"), canonical);
  EXPECT_EQ(normalize_url("http://example.com/page#top"), canonical);
  EXPECT_EQ(normalize_url("http://example.com/page?"), canonical);
  EXPECT_EQ(normalize_url("https://example.com:443/"), normalize_url("https://example.com"));
}

TEST(NormalizeUrl, KeepsMeaningfulDifferences) {
  EXPECT_NE(normalize_url("http://example.com/Page"), normalize_url("http://example.com/page"));
  EXPECT_NE(normalize_url("http://example.com/a?x=1"), normalize_url("http://example.com/a?x=2"));
  EXPECT_NE(normalize_url("http://example.com:8080/a"), normalize_url("http://example.com/a"));
  EXPECT_NE(normalize_url("https://example.com/a"), normalize_url("http://example.com/a"));
}

TEST(NormalizeUrl, UppercasesPercentEscapes) {
  EXPECT_EQ(normalize_url("http://example.com/a%7eb"), normalize_url("http://example.com/a%7Eb"));
}

TEST(NormalizeUrl, RejectsGarbage) { EXPECT_THROW(normalize_url("::nope"), ValidationError); }

TEST(RegistrableDomain, KeepsLastTwoLabels) {
  EXPECT_EQ(registrable_domain("fr.wikipedia.org"), "wikipedia.org");
  EXPECT_EQ(registrable_domain("www.example.com"), "example.com");
  EXPECT_EQ(registrable_domain("example.com"), "example.com");
  EXPECT_EQ(registrable_domain("WWW.Example.COM"), "example.com");
}

TEST(RegistrableDomain, HandlesSecondLevelCountryDomains) {
  EXPECT_EQ(registrable_domain("news.bbc.co.uk"), "bbc.co.uk");
  EXPECT_EQ(registrable_domain("www.univ.ac.jp"), "univ.ac.jp");
}

TEST(UrlEncode, EncodesReservedCharacters) {
  EXPECT_EQ(url_encode("a b&c"), "a+b%26c");
  EXPECT_EQ(url_encode("été"), "%C3%A9t%C3%A9");
  EXPECT_EQ(url_encode("safe-_.~"), "safe-_.~");
}
