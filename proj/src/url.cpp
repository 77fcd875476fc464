#include "serpeval/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

#include "serpeval/common.hpp"

namespace serpeval {

namespace {

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<int> default_port(std::string_view scheme) {
  if (scheme == "http" || scheme == "ws") return 80;
  if (scheme == "https" || scheme == "wss") return 443;
  if (scheme == "ftp") return 21;
  return std::nullopt;
}

// Length of a leading "scheme:" prefix, or 0 when there is none.
std::size_t scheme_length(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == ':') return i;
    if (!is_scheme_char(s[i])) return 0;
  }
  return 0;
}

struct Reference {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

Reference split_reference(std::string_view s) {
  Reference ref;
  if (auto hash = s.find('#'); hash != std::string_view::npos) {
    ref.fragment = std::string(s.substr(hash + 1));
    s = s.substr(0, hash);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    ref.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  if (auto len = scheme_length(s); len > 0) {
    ref.scheme = std::string(s.substr(0, len));
    s = s.substr(len + 1);
  }
  if (s.starts_with("//")) {
    s = s.substr(2);
    auto slash = s.find('/');
    ref.authority = std::string(s.substr(0, slash));
    s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
  }
  ref.path = std::string(s);
  return ref;
}

std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.starts_with("../")) {
      in.erase(0, 3);
    } else if (in.starts_with("./")) {
      in.erase(0, 2);
    } else if (in.starts_with("/./")) {
      in.erase(0, 2);
    } else if (in == "/.") {
      in = "/";
    } else if (in.starts_with("/../") || in == "/..") {
      in = in == "/.." ? std::string("/") : in.substr(3);
      auto last = out.rfind('/');
      out.erase(last == std::string::npos ? 0 : last);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = in[0] == '/' ? 1 : 0;
      auto next = in.find('/', start);
      out += in.substr(0, next);
      in.erase(0, next == std::string::npos ? in.size() : next);
    }
  }
  return out;
}

std::string uppercase_escapes(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i + 2 < out.size(); ++i) {
    if (out[i] == '%' && std::isxdigit(static_cast<unsigned char>(out[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(out[i + 2]))) {
      out[i + 1] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 1])));
      out[i + 2] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 2])));
      i += 2;
    }
  }
  return out;
}

}  // namespace

std::string Url::to_string() const {
  std::string out = scheme + "://";
  if (!userinfo.empty()) out += userinfo + "@";
  out += host;
  if (port) out += ":" + std::to_string(*port);
  out += path;
  if (query) out += "?" + *query;
  if (fragment) out += "#" + *fragment;
  return out;
}

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port) out += ":" + std::to_string(*port);
  return out;
}

std::string Url::request_target() const {
  std::string out = path.empty() ? "/" : path;
  if (query) out += "?" + *query;
  return out;
}

std::optional<Url> parse_absolute_url(std::string_view text) {
  for (unsigned char c : text)
    if (c <= 0x20 || c == 0x7F) return std::nullopt;

  auto ref = split_reference(text);
  if (!ref.scheme || !ref.authority) return std::nullopt;

  Url url;
  url.scheme = *ref.scheme;
  std::string_view authority = *ref.authority;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    url.userinfo = std::string(authority.substr(0, at));
    authority = authority.substr(at + 1);
  }
  std::string_view host = authority;
  std::string_view port;
  if (authority.starts_with("[")) {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    auto rest = authority.substr(close + 1);
    if (!rest.empty()) {
      if (rest[0] != ':') return std::nullopt;
      port = rest.substr(1);
    }
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) return std::nullopt;
  url.host = std::string(host);
  if (!port.empty()) {
    if (port.size() > 5 || !std::all_of(port.begin(), port.end(),
                                        [](unsigned char c) { return std::isdigit(c); }))
      return std::nullopt;
    int value = std::stoi(std::string(port));
    if (value > 65535) return std::nullopt;
    url.port = value;
  }
  url.path = ref.path;
  url.query = ref.query;
  url.fragment = ref.fragment;
  return url;
}

bool is_absolute_url(std::string_view text) { return parse_absolute_url(text).has_value(); }

std::optional<std::string> resolve_url(std::string_view base_text, std::string_view reference) {
  auto base = parse_absolute_url(base_text);
  if (!base) return std::nullopt;
  // Leading/trailing spaces are common in scraped hrefs.
  while (!reference.empty() && std::isspace(static_cast<unsigned char>(reference.front())))
    reference.remove_prefix(1);
  while (!reference.empty() && std::isspace(static_cast<unsigned char>(reference.back())))
    reference.remove_suffix(1);

  auto ref = split_reference(reference);
  Url target;
  if (ref.scheme) {
    auto parsed = parse_absolute_url(reference);
    if (!parsed) return std::nullopt;
    target = *parsed;
    target.path = remove_dot_segments(target.path);
    return target.to_string();
  }
  if (ref.authority) {
    auto parsed = parse_absolute_url(base->scheme + ":" + std::string(reference));
    if (!parsed) return std::nullopt;
    target = *parsed;
    target.path = remove_dot_segments(target.path);
    return target.to_string();
  }
  target = *base;
  target.fragment = ref.fragment;
  if (ref.path.empty()) {
    if (ref.query) target.query = ref.query;
  } else {
    if (ref.path.starts_with("/")) {
      target.path = remove_dot_segments(ref.path);
    } else {
      std::string merged;
      if (base->path.empty()) {
        merged = "/" + ref.path;
      } else {
        auto slash = base->path.rfind('/');
        merged = base->path.substr(0, slash + 1) + ref.path;
      }
      target.path = remove_dot_segments(merged);
    }
    target.query = ref.query;
  }
  auto out = target.to_string();
  if (!is_absolute_url(out)) return std::nullopt;
  return out;
}

std::string normalize_url(std::string_view text) {
  auto url = parse_absolute_url(text);
  if (!url) throw ValidationError("unparseable URL: " + std::string(text), "url");
  url->scheme = lower(url->scheme);
  url->host = lower(url->host);
  if (url->port && default_port(url->scheme) == url->port) url->port.reset();
  url->fragment.reset();
  if (url->query && url->query->empty()) url->query.reset();
  url->userinfo = uppercase_escapes(url->userinfo);
  url->path = uppercase_escapes(url->path);
  if (url->query) {
    url->query = uppercase_escapes(*url->query);
  } else {
    while (!url->path.empty() && url->path.back() == '/') url->path.pop_back();
  }
  return url->to_string();
}

std::string registrable_domain(std::string_view host_text) {
  std::string host = lower(host_text);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.starts_with("[")) return host;
  if (std::all_of(host.begin(), host.end(),
                  [](unsigned char c) { return std::isdigit(c) || c == '.'; }))
    return host;

  std::vector<std::string_view> labels;
  std::string_view rest = host;
  while (true) {
    auto dot = rest.find('.');
    labels.push_back(rest.substr(0, dot));
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  if (labels.size() <= 2) return host;

  static constexpr std::array<std::string_view, 10> kSecondLevel = {
      "co", "com", "org", "net", "ac", "gov", "edu", "ne", "or", "go"};
  std::size_t keep = 2;
  if (labels.back().size() == 2 &&
      std::find(kSecondLevel.begin(), kSecondLevel.end(), labels[labels.size() - 2]) !=
          kSecondLevel.end())
    keep = 3;
  std::string out;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return out;
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace serpeval
