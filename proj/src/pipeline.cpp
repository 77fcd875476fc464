#include "serpeval/pipeline.hpp"

#include <ostream>

#include "serpeval/relevance_kernels.hpp"

namespace serpeval {

std::filesystem::path contexts_dir(const std::filesystem::path& root) { return root / "contexts"; }

ReportBundle build_reports(const RunStore& store, const ContextBase& contexts,
                           std::string_view run_id, const Weights& weights,
                           const std::vector<int>& levels) {
  const RunManifest manifest = store.load_manifest(run_id);
  const auto dir = store.run_dir(run_id);
  ReportBundle bundle;

  if (std::filesystem::exists(dir / kProbeArtifact)) {
    bundle.performance = table_performance(manifest, probe_report_from_ndjson(read_file(dir / kProbeArtifact)));
  } else {
    bundle.missing.push_back(kProbeArtifact);
  }
  if (std::filesystem::exists(dir / kScoreArtifact)) {
    const auto scores = relevance_scores_from_ndjson(read_file(dir / kScoreArtifact));
    bundle.query = table_query(manifest, scores);
  } else {
    bundle.missing.push_back(kScoreArtifact);
  }

  const auto judgments = contexts.current_judgments(run_id);
  bundle.user = table_user(manifest, judgments, levels);
  if (judgments.empty()) {
    bundle.user.partial = true;
    bundle.user.flags.insert(bundle.user.flags.begin(), "no judgments recorded");
  }

  // Missing tables stand in as empty ones so their level counts as absent.
  const Table none;
  const auto scores = level_scores(manifest, bundle.performance ? *bundle.performance : none,
                                   bundle.user, bundle.query ? *bundle.query : none);
  bool coupled = true;
  for (const auto& s : scores) {
    if (!s.system && !s.query && !s.user) coupled = false;
  }
  if (coupled) {
    try {
      for (const auto& s : scores) bundle.final.push_back(couple_levels(s, weights));
      bundle.final_table = table_final(bundle.final);
    } catch (const ValidationError& e) {
      bundle.final.clear();
      bundle.coupling_error = e.what();
    }
  }
  return bundle;
}

Pipeline::Pipeline(Config config, std::shared_ptr<HttpClient> client, std::ostream& log)
    : config_(std::move(config)), client_(std::move(client)), log_(log), store_(config_.root) {}

ProtocolSummary Pipeline::run(bool force) {
  if (config_.run_id.empty()) throw ConfigError("config: run_id: missing");
  if (config_.engines.empty()) throw ConfigError("config: engines: at least one engine is required");
  RunManifest manifest = config_.manifest();
  manifest.created_at = now_utc_seconds();
  try {
    manifest.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  std::vector<std::unique_ptr<EngineAdapter>> owned;
  std::map<std::string, EngineAdapter*> adapters;
  for (const auto& a : config_.engines) {
    owned.push_back(make_adapter(a, client_));
    adapters[a.id] = owned.back().get();
  }

  store_.create_run(manifest, force);
  const auto summary = run_protocol(manifest, adapters, store_, *client_, config_.protocol_options());
  log_ << "run " << manifest.run_id << ": " << summary.groups << " groups, " << summary.triplets
       << " triplets";
  if (summary.fetch_failures) log_ << ", " << summary.fetch_failures << " pages not fetched";
  log_ << '\n';
  for (const auto& f : summary.query_failures) log_ << "warning: query failed: " << f << '\n';
  return summary;
}

LoadedRun Pipeline::load(std::string_view run_id) {
  if (!store_.exists(run_id))
    throw PipelineOrderError("run '" + std::string(run_id) + "' has no manifest; execute 'serpeval run' first");
  LoadedRun run = store_.load_run(run_id);
  for (const auto& c : run.corruption)
    log_ << "warning: triplets.ndjson line " << c.line << ": " << c.message << '\n';
  return run;
}

ProbeReport Pipeline::probe(std::string_view run_id) {
  const LoadedRun run = load(run_id);
  ProbeReport report = probe_run(run, *client_, config_.probe);
  write_file(store_.run_dir(run_id) / kProbeArtifact, to_ndjson(report));
  for (const auto& e : report.engines)
    log_ << "probe " << e.engine_id << ": " << e.analyzed << " links, " << e.dead << " dead, "
         << e.parasites << " parasites, " << e.redundant << " redundant\n";
  return report;
}

std::vector<RelevanceScore> Pipeline::score(std::string_view run_id) {
  const LoadedRun run = load(run_id);
  const auto scopes = build_scopes(run);
  auto scores = score_scopes_parallel(scopes);
  write_file(store_.run_dir(run_id) / kScoreArtifact, to_ndjson(scores, run.manifest));
  log_ << "score " << run_id << ": " << scores.size() << " documents weighted\n";
  return scores;
}

ReportBundle Pipeline::report(std::string_view run_id, Format format, const Weights& weights,
                              const RenderOptions& render) {
  if (!store_.exists(run_id))
    throw PipelineOrderError("run '" + std::string(run_id) + "' has no manifest; execute 'serpeval run' first");
  const auto dir = store_.run_dir(run_id);
  if (!std::filesystem::exists(dir / kProbeArtifact))
    throw PipelineOrderError(std::string("missing ") + kProbeArtifact + "; execute 'serpeval probe' first");
  if (!std::filesystem::exists(dir / kScoreArtifact))
    throw PipelineOrderError(std::string("missing ") + kScoreArtifact + "; execute 'serpeval score' first");

  ContextBase contexts(contexts_dir(config_.root));
  ReportBundle bundle = build_reports(store_, contexts, run_id, weights, config_.report.levels);
  const auto out = dir / "reports";
  for (const Table* t : {&*bundle.performance, &bundle.user, &*bundle.query})
    log_ << "wrote " << emit(*t, format, out, render).string() << '\n';
  if (bundle.final_table) {
    log_ << "wrote " << emit(*bundle.final_table, format, out, render).string() << '\n';
    nlohmann::json final = nlohmann::json::array();
    for (const auto& e : bundle.final)
      final.push_back({{"engine", e.engine_id},
                       {"coupled_score", e.coupled_score},
                       {"weights", {e.weights.system, e.weights.query, e.weights.user}},
                       {"system", e.levels.system ? nlohmann::json(*e.levels.system) : nlohmann::json()},
                       {"query", e.levels.query ? nlohmann::json(*e.levels.query) : nlohmann::json()},
                       {"user", e.levels.user ? nlohmann::json(*e.levels.user) : nlohmann::json()},
                       {"flags", e.flags}});
    write_file(out / "final.json", final.dump(2) + "\n");
  }
  if (bundle.coupling_error) throw ValidationError(*bundle.coupling_error, "weights");
  return bundle;
}

}  // namespace serpeval
