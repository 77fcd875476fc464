// serpeval: run, probe, score, report and serve search engine evaluations.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "serpeval/config.hpp"
#include "serpeval/pipeline.hpp"
#include "serpeval/service.hpp"

using namespace serpeval;

namespace {

bool uses_decimal_comma(const std::string& locale) {
  const std::string lang = locale.substr(0, 2);
  for (const char* l : {"fr", "de", "es", "it", "pt", "nl", "ru", "pl"})
    if (lang == l) return true;
  return false;
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate and compare search engines"};
  app.require_subcommand(1);

  std::string config_path, root, run_id;
  app.add_option("-c,--config", config_path, "JSON config file (default: $SERPEVAL_CONFIG)");
  app.add_option("--root", root, "Data root directory (overrides the config)");
  app.add_option("--run-id", run_id, "Run identifier (overrides the config)");

  bool force = false;
  auto* run = app.add_subcommand("run", "Query every engine and store the results");
  run->add_flag("--force", force, "Replace an existing run");

  auto* probe = app.add_subcommand("probe", "Check links: dead, redundant, parasite");
  auto* score = app.add_subcommand("score", "Weight every fetched document");

  std::string format, weights, locale;
  auto* report = app.add_subcommand("report", "Write the evaluation tables");
  report->add_option("--format", format, "text, csv or png")->check(CLI::IsMember({"text", "csv", "png"}));
  report->add_option("--weights", weights, "system,query,user coupling weights, e.g. 1,0,0");
  report->add_option("--locale", locale, "Rendering locale, e.g. fr for decimal commas");

  std::string addr;
  bool allow_skip = false, no_blind = false;
  auto* serve = app.add_subcommand("serve", "Serve the judgment API");
  serve->add_option("--addr", addr, "host:port (default: $SERPEVAL_ADDR or the config)");
  serve->add_flag("--allow-skip", allow_skip, "Let judges leave a group unfinished");
  serve->add_flag("--no-blind", no_blind, "Show engine names to judges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_path.empty()) config_path = env("SERPEVAL_CONFIG");
    Config config = config_path.empty() ? Config{} : load_config(config_path);
    if (!root.empty()) config.root = root;
    if (!run_id.empty()) config.run_id = run_id;
    if (*serve) {
      if (addr.empty()) addr = env("SERPEVAL_ADDR");
      if (addr.empty()) addr = config.service.addr;
      const auto [host, port] = parse_addr(addr);
      ServiceOptions options;
      options.blind = config.service.blind && !no_blind;
      options.allow_skip = config.service.allow_skip || allow_skip;
      options.token_ttl = config.service.token_ttl;
      options.weights = config.report.weights;
      options.levels = config.report.levels;
      JudgeService service(config.root, options);
      std::cerr << "serving " << config.root.string() << " on " << host << ":" << port << '\n';
      if (!service.listen(host, port)) throw IoError("cannot listen on " + addr);
      return 0;
    }

    if (config.run_id.empty()) throw ConfigError("no run id: set run_id in the config or pass --run-id");
    auto client = std::make_shared<HttplibClient>(config.fetch.timeout);
    Pipeline pipeline(config, client, std::cerr);
    if (*run) {
      pipeline.run(force);
    } else if (*probe) {
      pipeline.probe(config.run_id);
    } else if (*score) {
      pipeline.score(config.run_id);
    } else if (*report) {
      const Format fmt = format.empty() ? config.report.format : parse_format(format);
      const Weights w = weights.empty() ? config.report.weights : parse_weights(weights);
      RenderOptions render;
      render.decimal_comma = uses_decimal_comma(locale.empty() ? config.report.locale : locale);
      const auto bundle = pipeline.report(config.run_id, fmt, w, render);
      for (const auto& e : bundle.final) {
        std::cout << e.engine_id << '\t' << e.coupled_score;
        for (const auto& f : e.flags) std::cout << "\t[" << f << ']';
        std::cout << '\n';
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
