#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "serpeval/corpus.hpp"
#include "serpeval/judgments.hpp"
#include "serpeval/probe.hpp"
#include "serpeval/relevance.hpp"

namespace serpeval {

/// A labelled grid of numbers. Cells are stored already rounded to
/// `decimals`; an absent cell means "no data".
struct Table {
  std::string name;  // file stem: "table_performance", ...
  std::string title;
  std::string corner;
  std::vector<std::string> columns;
  std::vector<std::string> column_units;  // suffix per column, may be empty
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> cells;  // [row][column]
  int decimals = 2;
  bool partial = false;
  std::vector<std::string> flags;

  std::optional<double> cell(std::string_view row, std::string_view column) const;
};

/// Rows = engines; columns = dead %, parasite %, redundant %, mean response time.
Table table_performance(const RunManifest& manifest, const ProbeReport& report);

/// Default relevance levels reported for user judgments.
inline const std::vector<int> kDefaultLevels = {1, 5, 10, 15, 20};

std::string level_label(int k);  // 1 -> "R@01"

/// Rows = R@k levels; columns = engines; cell = mean over judged queries of
/// R@k, where per-rank values are first averaged across judges.
Table table_user(const RunManifest& manifest, std::span<const Judgment> judgments,
                 const std::vector<int>& levels = kDefaultLevels);

/// Rows = topics; columns = engines; cells = notes on 10.
Table table_query(const RunManifest& manifest, std::span<const RelevanceScore> scores);

// -- coupling ---------------------------------------------------------------------------

struct Weights {
  double system = 1.0 / 3.0;
  double query = 1.0 / 3.0;
  double user = 1.0 / 3.0;
};

/// "1,0,0" -> {1, 0, 0}. Throws ValidationError on malformed input.
Weights parse_weights(std::string_view text);

struct LevelScores {
  std::string engine_id;
  std::optional<double> system;  // each in [0, 1]
  std::optional<double> query;
  std::optional<double> user;
  bool system_partial = false;
  bool query_partial = false;
  bool user_partial = false;
};

struct FinalEvaluation {
  std::string engine_id;
  double coupled_score = 0.0;
  Weights weights;  // effective weights, sum 1
  LevelScores levels;
  std::vector<std::string> flags;
};

/// system = 1 - mean(dead, parasite, redundant rates); query = mean topic
/// note / 10; user = deepest R@k / 5.
std::vector<LevelScores> level_scores(const RunManifest& manifest, const Table& performance,
                                      const Table& user, const Table& query);

/// Convex combination of the available levels. Weights not summing to 1 are
/// normalized; a missing level's weight is spread proportionally over the
/// others. Both cases are flagged.
FinalEvaluation couple_levels(const LevelScores& levels, const Weights& weights);

Table table_final(std::span<const FinalEvaluation> evaluations);

// -- rendering --------------------------------------------------------------------------

enum class Format { Text, Csv, Png };

Format parse_format(std::string_view text);
std::string_view extension(Format format);

struct RenderOptions {
  bool decimal_comma = false;  // French-style "2,03"
};

std::string render_text(const Table& table, const RenderOptions& options = {});
std::string render_csv(const Table& table, const RenderOptions& options = {});
/// Inverse of render_csv (values, labels and column order).
Table table_from_csv(std::string_view csv, const RenderOptions& options = {});

/// Writes `<dir>/<table.name>.<ext>`; returns the path. Throws IoError.
std::filesystem::path emit(const Table& table, Format format, const std::filesystem::path& dir,
                           const RenderOptions& options = {});

nlohmann::json to_json_value(const Table& table);

}  // namespace serpeval
