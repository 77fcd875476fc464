#include "serpeval/config.hpp"

#include <json.hpp>

namespace serpeval {

using nlohmann::json;

RunManifest Config::manifest() const {
  RunManifest m;
  m.run_id = run_id;
  for (const auto& e : engines) m.engines.push_back(e.id);
  m.topics = topics;
  m.queries = queries;
  m.results_per_query = results_per_query;
  return m;
}

ProtocolOptions Config::protocol_options() const {
  ProtocolOptions o;
  o.max_in_flight = fetch.max_in_flight;
  o.host_interval = fetch.host_interval;
  o.max_redirects = fetch.max_redirects;
  o.retry.max_attempts = fetch.query_attempts;
  o.retry.backoff = fetch.query_backoff;
  return o;
}

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError("config: " + (path_.empty() ? std::string("document") : path_) + ": " + message);
  }

  [[noreturn]] void fail_at(std::string_view k, const std::string& message) const {
    throw ConfigError("config: " + key(k) + ": " + message);
  }

  std::string key(std::string_view k) const { return path_.empty() ? std::string(k) : path_ + "." + std::string(k); }

  const json* find(std::string_view k) const {
    auto it = node_.find(std::string(k));
    return it == node_.end() ? nullptr : &*it;
  }

  Reader object(std::string_view k) const {
    static const json empty = json::object();
    const json* v = find(k);
    return Reader(v ? *v : empty, key(k));
  }

  template <class T>
  T get(std::string_view k, T fallback) const {
    const json* v = find(k);
    if (!v) return fallback;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::runtime_error("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw std::runtime_error("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::runtime_error("expected a number");
      } else {
        if (!v->is_string()) throw std::runtime_error("expected a string");
      }
      return v->get<T>();
    } catch (const std::exception& e) {
      throw ConfigError("config: " + key(k) + ": " + e.what());
    }
  }

  std::string required_string(std::string_view k) const {
    const json* v = find(k);
    if (!v) throw ConfigError("config: " + key(k) + ": missing");
    if (!v->is_string() || v->get<std::string>().empty())
      throw ConfigError("config: " + key(k) + ": expected a non-empty string");
    return v->get<std::string>();
  }

  const json& array(std::string_view k) const {
    static const json empty = json::array();
    const json* v = find(k);
    if (!v) return empty;
    if (!v->is_array()) throw ConfigError("config: " + key(k) + ": expected an array");
    return *v;
  }

  std::chrono::milliseconds millis(std::string_view k, std::chrono::milliseconds fallback) const {
    const auto v = get<std::int64_t>(k, fallback.count());
    if (v < 0) throw ConfigError("config: " + key(k) + ": must be >= 0");
    return std::chrono::milliseconds(v);
  }

 private:
  const json& node_;
  std::string path_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::vector<std::string> strings(const Reader& r, std::string_view k) {
  std::vector<std::string> out;
  for (const auto& v : r.array(k)) {
    if (!v.is_string()) throw ConfigError("config: " + r.key(k) + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  Reader top(doc, "");
  Config c;
  if (const json* root = top.find("root")) {
    if (!root->is_string()) top.fail_at("root", "expected a string");
    c.root = resolve(base_dir, root->get<std::string>());
  } else if (!base_dir.empty()) {
    c.root = base_dir / c.root;
  }
  c.run_id = top.get<std::string>("run_id", "");
  c.results_per_query = top.get<int>("results_per_query", 20);
  if (c.results_per_query < 1) throw ConfigError("config: results_per_query: must be >= 1");

  const auto& engines = top.array("engines");
  for (std::size_t i = 0; i < engines.size(); ++i) {
    Reader e(engines[i], "engines[" + std::to_string(i) + "]");
    AdapterConfig a;
    a.id = e.required_string("id");
    const auto mode = e.get<std::string>("mode", "fixture");
    try {
      a.mode = parse_adapter_mode(mode);
    } catch (const Error&) {
      throw ConfigError("config: " + e.key("mode") + ": unknown adapter mode '" + mode +
                        "' for engine '" + a.id + "'");
    }
    if (auto dir = e.get<std::string>("dir", ""); !dir.empty()) a.dir = resolve(base_dir, dir);
    a.delay = e.millis("delay_ms", a.delay);
    a.url_template = e.get<std::string>("url_template", "");
    a.results_path = e.get<std::string>("results_path", a.results_path);
    a.url_field = e.get<std::string>("url_field", a.url_field);
    a.title_field = e.get<std::string>("title_field", a.title_field);
    a.snippet_field = e.get<std::string>("snippet_field", a.snippet_field);
    a.parser = e.get<std::string>("parser", "");
    for (const auto& prev : c.engines)
      if (prev.id == a.id) throw ConfigError("config: engines: duplicate engine id '" + a.id + "'");
    c.engines.push_back(std::move(a));
  }

  const auto& topics = top.array("topics");
  for (std::size_t i = 0; i < topics.size(); ++i) {
    Reader t(topics[i], "topics[" + std::to_string(i) + "]");
    Topic topic{t.required_string("id"), t.get<std::string>("label", "")};
    const auto& queries = t.array("queries");
    for (std::size_t j = 0; j < queries.size(); ++j) {
      Reader q(queries[j], t.key("queries[" + std::to_string(j) + "]"));
      QuerySpec spec;
      spec.id = q.required_string("id");
      spec.topic_id = topic.id;
      spec.text = q.required_string("text");
      spec.exact_mode = q.get<bool>("exact", false);
      c.queries.push_back(std::move(spec));
    }
    c.topics.push_back(std::move(topic));
  }

  const Reader fetch = top.object("fetch");
  c.fetch.max_in_flight = fetch.get<std::size_t>("max_in_flight", c.fetch.max_in_flight);
  if (c.fetch.max_in_flight == 0) fetch.fail_at("max_in_flight", "must be >= 1");
  c.fetch.host_interval = fetch.millis("host_interval_ms", c.fetch.host_interval);
  c.fetch.timeout = fetch.millis("timeout_ms", c.fetch.timeout);
  c.fetch.max_redirects = fetch.get<int>("max_redirects", c.fetch.max_redirects);
  c.fetch.query_attempts = fetch.get<int>("query_attempts", c.fetch.query_attempts);
  if (c.fetch.query_attempts < 1) fetch.fail_at("query_attempts", "must be >= 1");
  c.fetch.query_backoff = fetch.millis("query_backoff_ms", c.fetch.query_backoff);

  const Reader probe = top.object("probe");
  c.probe.retry.max_attempts = probe.get<int>("max_attempts", c.probe.retry.max_attempts);
  if (c.probe.retry.max_attempts < 1) probe.fail_at("max_attempts", "must be >= 1");
  c.probe.retry.retry_delay = probe.millis("retry_delay_ms", c.probe.retry.retry_delay);
  c.probe.retry.max_redirects = c.fetch.max_redirects;
  if (probe.find("soft404_phrases")) c.probe.retry.soft404_phrases = strings(probe, "soft404_phrases");
  if (auto level = probe.get<std::string>("redundancy", ""); !level.empty()) {
    try {
      c.probe.redundancy = parse_redundancy_level(level);
    } catch (const Error&) {
      throw ConfigError("config: probe.redundancy: unknown level '" + level + "'");
    }
  }
  c.probe.parasites.host_blocklist = strings(probe, "blocklist");
  c.probe.max_in_flight = c.fetch.max_in_flight;
  c.probe.host_interval = c.fetch.host_interval;

  const Reader report = top.object("report");
  if (const json* w = report.find("weights")) {
    try {
      if (w->is_string()) {
        c.report.weights = parse_weights(w->get<std::string>());
      } else if (w->is_array() && w->size() == 3 && (*w)[0].is_number() && (*w)[1].is_number() &&
                 (*w)[2].is_number()) {
        c.report.weights = {(*w)[0].get<double>(), (*w)[1].get<double>(), (*w)[2].get<double>()};
      } else {
        report.fail_at("weights", "expected three numbers");
      }
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("config: report.weights: ") + e.what());
    }
  }
  c.report.locale = report.get<std::string>("locale", c.report.locale);
  if (const json* levels = report.find("levels")) {
    if (!levels->is_array() || levels->empty()) report.fail_at("levels", "expected a non-empty array");
    c.report.levels.clear();
    for (const auto& v : *levels) {
      if (!v.is_number_integer() || v.get<int>() < 1) report.fail_at("levels", "expected integers >= 1");
      c.report.levels.push_back(v.get<int>());
    }
  }
  if (auto fmt = report.get<std::string>("format", ""); !fmt.empty()) {
    try {
      c.report.format = parse_format(fmt);
    } catch (const ValidationError&) {
      report.fail_at("format", "unknown format '" + fmt + "'");
    }
  }

  const Reader service = top.object("service");
  c.service.addr = service.get<std::string>("addr", c.service.addr);
  c.service.blind = service.get<bool>("blind", c.service.blind);
  c.service.allow_skip = service.get<bool>("allow_skip", c.service.allow_skip);
  c.service.token_ttl = std::chrono::seconds(service.get<std::int64_t>("token_ttl_s", c.service.token_ttl.count()));
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text, path.parent_path());
}

std::pair<std::string, int> parse_addr(std::string_view addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("address '" + std::string(addr) + "' lacks a port");
  std::string host(addr.substr(0, colon));
  const std::string port_text(addr.substr(colon + 1));
  if (host.empty()) host = "0.0.0.0";
  if (host.size() > 1 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw ConfigError("address '" + std::string(addr) + "' has a bad port");
  return {host, port};
}

}  // namespace serpeval
