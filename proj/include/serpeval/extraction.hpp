#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace serpeval {

// -- lenient HTML lexing (shared by text extraction and SERP parsing) ---------

struct HtmlToken {
  enum class Kind { Text, StartTag, EndTag, Comment, Doctype };

  Kind kind = Kind::Text;
  std::string name;  // lowercased tag name
  std::vector<std::pair<std::string, std::string>> attributes;  // names lowercased, values decoded
  std::string text;         // decoded text, or raw body of script/style
  std::string raw_element;  // "script"/"style" when text is a raw-text element body
  bool self_closing = false;
  std::size_t offset = 0;  // byte offset of the token in the input

  std::optional<std::string_view> attribute(std::string_view attr) const;
  /// True when the whitespace-separated class attribute contains `cls`.
  bool has_class(std::string_view cls) const;
};

/// Never fails: malformed markup degrades to text.
std::vector<HtmlToken> lex_html(std::string_view html);

/// Decodes named (common subset) and numeric character references.
std::string decode_entities(std::string_view text);

// -- text ---------------------------------------------------------------------

/// Visible text of a page: script/style/comments dropped, block boundaries
/// become spaces, entities decoded, whitespace collapsed. Invalid UTF-8 is
/// replaced rather than rejected.
std::string extract_text(std::string_view raw_html);

/// Simple case folding over Latin, Greek and Cyrillic letters.
std::string case_fold(std::string_view text);

/// Splits on Unicode whitespace, strips leading/trailing punctuation,
/// case-folds. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

struct DocumentText {
  std::string url;
  std::vector<std::string> tokens;

  std::size_t length() const { return tokens.size(); }
};

DocumentText make_document(std::string url, std::string_view text);

/// Number of positions where `group` occurs contiguously in `tokens`;
/// overlapping occurrences count.
std::size_t count_group(std::span<const std::string> tokens, std::span<const std::string> group);

}  // namespace serpeval
