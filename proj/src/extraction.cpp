#include "serpeval/extraction.hpp"

#include <algorithm>
#include <array>

#include "serpeval/common.hpp"

namespace serpeval {

namespace {

constexpr std::array<std::string_view, 44> kBlockElements = {
    "address", "article", "aside", "blockquote", "body",   "br",      "caption", "dd",
    "div",     "dl",      "dt",    "fieldset",   "figcaption", "figure", "footer", "form",
    "h1",      "h2",      "h3",    "h4",         "h5",     "h6",      "head",    "header",
    "hr",      "html",    "li",    "main",       "nav",    "ol",      "option",  "p",
    "pre",     "section", "table", "tbody",      "td",     "tfoot",   "th",      "thead",
    "title",   "tr",      "ul",    "img"};

bool is_block(std::string_view name) {
  return std::find(kBlockElements.begin(), kBlockElements.end(), name) != kBlockElements.end();
}

bool is_unicode_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
                        (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  return cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 || cp == 0xBB ||
         cp == 0xBF || (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) || cp == 0xFFFD;
}

char32_t fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) return cp | 1;
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp & 1) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

}  // namespace

std::string extract_text(std::string_view raw_html) {
  std::string html = utf8::sanitize(raw_html);
  std::string text;
  text.reserve(html.size() / 2);
  for (const auto& token : lex_html(html)) {
    switch (token.kind) {
      case HtmlToken::Kind::Text:
        if (token.raw_element.empty()) text += token.text;
        break;
      case HtmlToken::Kind::StartTag:
      case HtmlToken::Kind::EndTag:
        if (is_block(token.name)) text.push_back(' ');
        break;
      default:
        break;
    }
  }

  // Collapse whitespace (including NBSP from &nbsp;) to single spaces.
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8::next(text, pos);
    if (is_unicode_space(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.append(text, start, pos - start);
  }
  return out;
}

std::string case_fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) utf8::append(out, fold(utf8::next(text, pos)));
  return out;
}

std::vector<std::string> tokenize(std::string_view raw) {
  std::string text = utf8::sanitize(raw);
  std::vector<std::string> tokens;
  std::vector<char32_t> word;

  auto emit = [&] {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_punctuation(word[begin])) ++begin;
    while (end > begin && is_punctuation(word[end - 1])) --end;
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) utf8::append(token, fold(word[i]));
      tokens.push_back(std::move(token));
    }
    word.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8::next(text, pos);
    if (is_unicode_space(cp)) {
      emit();
    } else {
      word.push_back(cp);
    }
  }
  emit();
  return tokens;
}

DocumentText make_document(std::string url, std::string_view text) {
  return DocumentText{std::move(url), tokenize(text)};
}

std::size_t count_group(std::span<const std::string> tokens, std::span<const std::string> group) {
  if (group.empty() || group.size() > tokens.size()) return 0;
  std::size_t count = 0;
  const std::size_t last = tokens.size() - group.size();
  for (std::size_t i = 0; i <= last; ++i) {
    if (tokens[i] != group[0]) continue;
    if (std::equal(group.begin() + 1, group.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i) + 1))
      ++count;
  }
  return count;
}

}  // namespace serpeval
