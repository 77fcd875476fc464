#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "serpeval/engines.hpp"
#include "serpeval/probe.hpp"
#include "serpeval/report.hpp"

namespace serpeval {

struct FetchConfig {
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds host_interval{500};
  std::chrono::milliseconds timeout{10000};
  int max_redirects = 5;
  int query_attempts = 3;
  std::chrono::milliseconds query_backoff{200};
};

struct ReportConfig {
  Weights weights;
  std::string locale = "en";
  std::vector<int> levels = kDefaultLevels;
  Format format = Format::Text;
};

struct ServiceConfig {
  std::string addr = "127.0.0.1:8080";
  bool blind = true;
  bool allow_skip = false;
  std::chrono::seconds token_ttl{8 * 3600};
};

struct Config {
  std::filesystem::path root = "serpeval-data";
  std::string run_id;
  int results_per_query = 20;
  std::vector<AdapterConfig> engines;
  std::vector<Topic> topics;
  std::vector<QuerySpec> queries;
  FetchConfig fetch;
  ProbeOptions probe;
  ReportConfig report;
  ServiceConfig service;

  RunManifest manifest() const;
  ProtocolOptions protocol_options() const;
};

/// Parses a JSON config document. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the offending key.
Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// "host:port" or ":port" -> (host, port). Throws ConfigError.
std::pair<std::string, int> parse_addr(std::string_view addr);

}  // namespace serpeval
