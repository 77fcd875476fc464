#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace serpeval {

/// Components of an absolute hierarchical URL (scheme "://" authority ...).
struct Url {
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::optional<int> port;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  std::string to_string() const;
  /// "scheme://host[:port]" as accepted by HTTP clients.
  std::string origin() const;
  /// Path plus query, never empty ("/" at minimum).
  std::string request_target() const;
};

/// Parses an absolute URL. Relative references, missing hosts, embedded
/// whitespace and out-of-range ports all yield nullopt.
std::optional<Url> parse_absolute_url(std::string_view text);

bool is_absolute_url(std::string_view text);

/// Resolves `reference` against an absolute `base` (RFC 3986 section 5.2).
std::optional<std::string> resolve_url(std::string_view base, std::string_view reference);

/// Canonical form used for exact-url redundancy: lowercased scheme and host,
/// default port dropped, fragment dropped, trailing slashes stripped when the
/// query is empty, percent-escapes uppercased, query order preserved.
/// Throws ValidationError on an unparseable URL.
std::string normalize_url(std::string_view url);

/// Registrable domain approximation for same-site redundancy. Without a
/// public-suffix list we keep the last two labels, or three when the
/// second-level label is a common generic one under a two-letter ccTLD
/// ("bbc.co.uk"). IP literals are returned unchanged.
std::string registrable_domain(std::string_view host);

/// application/x-www-form-urlencoded style escaping for query values.
std::string url_encode(std::string_view text);

}  // namespace serpeval
