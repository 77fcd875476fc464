#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "serpeval/config.hpp"
#include "serpeval/corpus.hpp"
#include "serpeval/http.hpp"
#include "serpeval/judgments.hpp"
#include "serpeval/probe.hpp"
#include "serpeval/relevance.hpp"
#include "serpeval/report.hpp"

namespace serpeval {

inline constexpr const char* kProbeArtifact = "probe_report.ndjson";
inline constexpr const char* kScoreArtifact = "relevance_scores.ndjson";

/// Every table derivable from a run's persisted state at one point in time.
struct ReportBundle {
  std::optional<Table> performance;  // absent before probing
  std::optional<Table> query;        // absent before scoring
  Table user;
  std::vector<FinalEvaluation> final;
  std::optional<Table> final_table;
  std::optional<std::string> coupling_error;  // weights leave no available level
  std::vector<std::string> missing;  // artifacts not yet produced
};

ReportBundle build_reports(const RunStore& store, const ContextBase& contexts,
                           std::string_view run_id, const Weights& weights,
                           const std::vector<int>& levels = kDefaultLevels);

std::filesystem::path contexts_dir(const std::filesystem::path& root);

/// The CLI stages. Each throws an Error subclass whose exit code the CLI returns.
class Pipeline {
 public:
  Pipeline(Config config, std::shared_ptr<HttpClient> client, std::ostream& log);

  const Config& config() const { return config_; }
  RunStore& store() { return store_; }

  ProtocolSummary run(bool force);
  ProbeReport probe(std::string_view run_id);
  std::vector<RelevanceScore> score(std::string_view run_id);
  /// Requires probe and score artifacts. Writes every table to reports/.
  ReportBundle report(std::string_view run_id, Format format, const Weights& weights,
                      const RenderOptions& render);

 private:
  LoadedRun load(std::string_view run_id);

  Config config_;
  std::shared_ptr<HttpClient> client_;
  std::ostream& log_;
  RunStore store_;
};

}  // namespace serpeval
