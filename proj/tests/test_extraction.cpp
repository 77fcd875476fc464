#include <gtest/gtest.h>

#include "serpeval/extraction.hpp"

using namespace serpeval;

TEST(LexHtml, TagsAttributesAndText) {
  auto tokens = lex_html(R"(<DIV Class="a  b" data-x='1'>Hi &amp; bye<br/></div>)");
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(tokens[0].kind, HtmlToken::Kind::StartTag);
  EXPECT_EQ(tokens[0].name, "div");
  EXPECT_TRUE(tokens[0].has_class("b"));
  EXPECT_FALSE(tokens[0].has_class("c"));
  EXPECT_EQ(tokens[0].attribute("data-x"), "1");
  EXPECT_EQ(tokens[1].text, "Hi & bye");
  EXPECT_TRUE(tokens[2].self_closing);
  EXPECT_EQ(tokens[3].kind, HtmlToken::Kind::EndTag);
}

TEST(LexHtml, RawTextElementsKeepMarkup) {
  auto tokens = lex_html("<script>if (a < b) x = '</p>';</script>after");
  auto body = std::find_if(tokens.begin(), tokens.end(),
                           [](const HtmlToken& t) { return t.raw_element == "script"; });
  ASSERT_NE(body, tokens.end());
  EXPECT_NE(body->text.find("</p>"), std::string::npos);
  EXPECT_EQ(tokens.back().text, "after");
}

TEST(LexHtml, MalformedMarkupNeverThrows) {
  for (const char* html : {"<", "<a href=", "<!--", "<<<>>>", "<div class=\"x", "</", "&#"})
    EXPECT_NO_THROW(lex_html(html)) << html;
}

TEST(DecodeEntities, NamedAndNumeric) {
  EXPECT_EQ(decode_entities("&lt;a&gt; &quot;q&quot; &#233;t&#xE9;"), "<a> \"q\" été");
  EXPECT_EQ(decode_entities("&unknown; &amp"), "&unknown; &amp");
}

TEST(ExtractText, DropsScriptsStylesAndComments) {
  const auto text = extract_text(
      "<html><head><title>T</title><style>p{}</style></head>"
      "<body><!-- hidden --><p>One</p><p>Two&nbsp;three</p><script>var x;</script></body></html>");
  EXPECT_EQ(text, "T One Two three");
}

TEST(ExtractText, InlineElementsDoNotSplitWords) {
  EXPECT_EQ(extract_text("<p>ex<b>amp</b>le</p>"), "example");
  EXPECT_EQ(extract_text("<li>a</li><li>b</li>"), "a b");
}

TEST(ExtractText, InvalidUtf8IsReplaced) {
  const auto text = extract_text(std::string("ok \xff\xfe bytes"));
  EXPECT_NE(text.find("ok"), std::string::npos);
  EXPECT_NE(text.find("bytes"), std::string::npos);
}

TEST(CaseFold, LatinGreekCyrillic) {
  EXPECT_EQ(case_fold("ÉCOLE Straße"), "école straße");
  EXPECT_EQ(case_fold("ΑΘΗΝΑ"), "αθηνα");
  EXPECT_EQ(case_fold("МОСКВА Ёж"), "москва ёж");
}

TEST(Tokenize, SplitsFoldsAndTrimsPunctuation) {
  EXPECT_EQ(tokenize("  «Hello», WORLD!  it's (fine)... "),
            (std::vector<std::string>{"hello", "world", "it's", "fine"}));
  EXPECT_EQ(tokenize("a b　c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(tokenize(" -- ... ").empty());
}

TEST(CountGroup, CountsOverlappingRuns) {
  const std::vector<std::string> tokens = {"a", "a", "a", "b", "a", "a"};
  EXPECT_EQ(count_group(tokens, std::vector<std::string>{"a"}), 5u);
  EXPECT_EQ(count_group(tokens, std::vector<std::string>{"a", "a"}), 3u);
  EXPECT_EQ(count_group(tokens, std::vector<std::string>{"a", "b", "a"}), 1u);
  EXPECT_EQ(count_group(tokens, std::vector<std::string>{"c"}), 0u);
  EXPECT_EQ(count_group(tokens, std::vector<std::string>(7, "a")), 0u);
}

TEST(MakeDocument, LengthIsTokenCount) {
  auto doc = make_document("https://x.example/", "Alpha beta, gamma.");
  EXPECT_EQ(doc.length(), 3u);
  EXPECT_EQ(doc.url, "https://x.example/");
}
