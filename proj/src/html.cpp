#include <algorithm>
#include <array>
#include <cctype>

#include "serpeval/common.hpp"
#include "serpeval/extraction.hpp"

namespace serpeval {

namespace {

struct NamedEntity {
  std::string_view name;
  char32_t code_point;
};

// Sorted by name for binary search.
constexpr std::array<NamedEntity, 48> kEntities = {{
    {"Aacute", 0xC1}, {"Agrave", 0xC0}, {"Ccedil", 0xC7}, {"Eacute", 0xC9},
    {"Egrave", 0xC8}, {"aacute", 0xE1}, {"acirc", 0xE2},  {"agrave", 0xE0},
    {"amp", '&'},     {"apos", '\''},   {"auml", 0xE4},   {"bull", 0x2022},
    {"ccedil", 0xE7}, {"copy", 0xA9},   {"eacute", 0xE9}, {"ecirc", 0xEA},
    {"egrave", 0xE8}, {"euml", 0xEB},   {"euro", 0x20AC}, {"gt", '>'},
    {"hellip", 0x2026}, {"iacute", 0xED}, {"icirc", 0xEE}, {"iuml", 0xEF},
    {"laquo", 0xAB},  {"ldquo", 0x201C}, {"lsquo", 0x2018}, {"lt", '<'},
    {"mdash", 0x2014}, {"middot", 0xB7}, {"nbsp", 0xA0},  {"ndash", 0x2013},
    {"ntilde", 0xF1}, {"oacute", 0xF3}, {"ocirc", 0xF4},  {"ouml", 0xF6},
    {"quot", '"'},    {"raquo", 0xBB},  {"rdquo", 0x201D}, {"reg", 0xAE},
    {"rsquo", 0x2019}, {"szlig", 0xDF}, {"trade", 0x2122}, {"uacute", 0xFA},
    {"ucirc", 0xFB},  {"ugrave", 0xF9}, {"uuml", 0xFC},   {"yuml", 0xFF},
}};

std::optional<char32_t> lookup_entity(std::string_view name) {
  auto it = std::lower_bound(kEntities.begin(), kEntities.end(), name,
                             [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it != kEntities.end() && it->name == name) return it->code_point;
  return std::nullopt;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_raw_text_element(std::string_view name) { return name == "script" || name == "style"; }

// Case-insensitive search for "</name" starting at `from`.
std::size_t find_closing(std::string_view html, std::string_view name, std::size_t from) {
  for (std::size_t pos = html.find("</", from); pos != std::string_view::npos;
       pos = html.find("</", pos + 2)) {
    if (pos + 2 + name.size() > html.size()) return std::string_view::npos;
    bool match = true;
    for (std::size_t i = 0; i < name.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(html[pos + 2 + i])) != name[i]) {
        match = false;
        break;
      }
    if (match) return pos;
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<std::string_view> HtmlToken::attribute(std::string_view attr) const {
  for (const auto& [k, v] : attributes)
    if (k == attr) return std::string_view(v);
  return std::nullopt;
}

bool HtmlToken::has_class(std::string_view cls) const {
  auto value = attribute("class");
  if (!value) return false;
  std::string_view rest = *value;
  while (!rest.empty()) {
    auto start = rest.find_first_not_of(" \t\n\r\f");
    if (start == std::string_view::npos) break;
    rest = rest.substr(start);
    auto end = rest.find_first_of(" \t\n\r\f");
    if (rest.substr(0, end) == cls) return true;
    if (end == std::string_view::npos) break;
    rest = rest.substr(end);
  }
  return false;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view body = text.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (body.size() >= 2 && body[0] == '#') {
      bool hex = body[1] == 'x' || body[1] == 'X';
      std::string_view digits = body.substr(hex ? 2 : 1);
      if (!digits.empty() &&
          std::all_of(digits.begin(), digits.end(), [hex](unsigned char c) {
            return hex ? std::isxdigit(c) : std::isdigit(c);
          })) {
        unsigned long value = std::stoul(std::string(digits), nullptr, hex ? 16 : 10);
        if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) value = 0xFFFD;
        cp = static_cast<char32_t>(value);
      }
    } else {
      cp = lookup_entity(body);
    }
    if (!cp) {
      out.push_back(text[i++]);
      continue;
    }
    utf8::append(out, *cp);
    i = semi + 1;
  }
  return out;
}

std::vector<HtmlToken> lex_html(std::string_view html) {
  std::vector<HtmlToken> tokens;
  std::string pending_text;
  std::size_t pending_offset = 0;

  auto flush_text = [&] {
    if (pending_text.empty()) return;
    HtmlToken token;
    token.kind = HtmlToken::Kind::Text;
    token.text = decode_entities(pending_text);
    token.offset = pending_offset;
    tokens.push_back(std::move(token));
    pending_text.clear();
  };
  auto add_text = [&](std::size_t at, std::string_view chunk) {
    if (pending_text.empty()) pending_offset = at;
    pending_text.append(chunk);
  };

  std::size_t i = 0;
  while (i < html.size()) {
    auto lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      add_text(i, html.substr(i));
      break;
    }
    if (lt > i) add_text(i, html.substr(i, lt - i));
    i = lt;
    std::string_view rest = html.substr(i);

    if (rest.starts_with("<!--")) {
      flush_text();
      auto end = html.find("-->", i + 4);
      HtmlToken token;
      token.kind = HtmlToken::Kind::Comment;
      token.offset = i;
      token.text = std::string(html.substr(i + 4, (end == std::string_view::npos ? html.size() : end) - i - 4));
      tokens.push_back(std::move(token));
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      flush_text();
      auto end = html.find('>', i);
      HtmlToken token;
      token.kind = HtmlToken::Kind::Doctype;
      token.offset = i;
      tokens.push_back(std::move(token));
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    bool closing = rest.size() > 2 && rest[1] == '/';
    std::size_t name_start = i + (closing ? 2 : 1);
    if (name_start >= html.size() || !std::isalpha(static_cast<unsigned char>(html[name_start]))) {
      add_text(i, "<");
      ++i;
      continue;
    }
    flush_text();
    std::size_t p = name_start;
    while (p < html.size() && !is_space(html[p]) && html[p] != '>' && html[p] != '/') ++p;

    HtmlToken token;
    token.kind = closing ? HtmlToken::Kind::EndTag : HtmlToken::Kind::StartTag;
    token.name = lower(html.substr(name_start, p - name_start));
    token.offset = i;

    // Attributes (ignored on end tags).
    while (p < html.size() && html[p] != '>') {
      if (is_space(html[p])) {
        ++p;
        continue;
      }
      if (html[p] == '/') {
        token.self_closing = p + 1 < html.size() && html[p + 1] == '>';
        ++p;
        continue;
      }
      std::size_t a = p;
      while (p < html.size() && !is_space(html[p]) && html[p] != '=' && html[p] != '>' &&
             !(html[p] == '/' && p + 1 < html.size() && html[p + 1] == '>'))
        ++p;
      std::string attr_name = lower(html.substr(a, p - a));
      while (p < html.size() && is_space(html[p])) ++p;
      std::string value;
      if (p < html.size() && html[p] == '=') {
        ++p;
        while (p < html.size() && is_space(html[p])) ++p;
        if (p < html.size() && (html[p] == '"' || html[p] == '\'')) {
          char quote = html[p++];
          auto close = html.find(quote, p);
          if (close == std::string_view::npos) close = html.size();
          value = std::string(html.substr(p, close - p));
          p = std::min(close + 1, html.size());
        } else {
          std::size_t v = p;
          while (p < html.size() && !is_space(html[p]) && html[p] != '>') ++p;
          value = std::string(html.substr(v, p - v));
        }
      }
      if (!closing && !attr_name.empty())
        token.attributes.emplace_back(std::move(attr_name), decode_entities(value));
    }
    i = p < html.size() ? p + 1 : html.size();

    bool raw = !closing && !token.self_closing && is_raw_text_element(token.name);
    std::string name = token.name;
    tokens.push_back(std::move(token));
    if (raw) {
      auto close = find_closing(html, name, i);
      std::size_t body_end = close == std::string_view::npos ? html.size() : close;
      if (body_end > i) {
        HtmlToken body;
        body.kind = HtmlToken::Kind::Text;
        body.text = std::string(html.substr(i, body_end - i));
        body.raw_element = name;
        body.offset = i;
        tokens.push_back(std::move(body));
      }
      i = body_end;
    }
  }
  flush_text();
  return tokens;
}

}  // namespace serpeval
