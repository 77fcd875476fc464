#include "serpeval/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "serpeval/chart.hpp"

namespace serpeval {

std::optional<double> Table::cell(std::string_view row, std::string_view column) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] != row) continue;
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == column) return cells[r][c];
  }
  return std::nullopt;
}

namespace {

double round_to(double value, int decimals) {
  if (decimals == 2) return round2(value);
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::optional<double> mean(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

Table table_performance(const RunManifest& manifest, const ProbeReport& report) {
  Table t;
  t.name = "table_performance";
  t.title = "System performance";
  t.corner = "Engine";
  t.columns = {"Dead Links", "Parasites Pages", "Redundant Results", "Average Response Time"};
  t.column_units = {"%", "%", "%", " s"};
  for (const auto& engine : manifest.engines) {
    t.rows.push_back(engine);
    const EngineProbe* probe = report.engine(engine);
    std::vector<std::optional<double>> row(4);
    if (probe && probe->analyzed > 0) {
      row[0] = round2(probe->dead_rate);
      row[1] = round2(probe->parasite_rate);
      row[2] = round2(probe->redundancy_rate);
    }
    if (probe && probe->timed_queries > 0) row[3] = round2(probe->avg_response_time);
    if (!probe || probe->analyzed == 0) {
      t.partial = true;
      t.flags.push_back(engine + ": no analyzed links");
    }
    t.cells.push_back(std::move(row));
  }
  return t;
}

std::string level_label(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R@%02d", k);
  return buf;
}

Table table_user(const RunManifest& manifest, std::span<const Judgment> judgments,
                 const std::vector<int>& levels) {
  Table t;
  t.name = "table_user";
  t.title = "User-level relevance";
  t.corner = "Level";
  t.columns = manifest.engines;
  t.column_units.assign(t.columns.size(), "");
  for (int k : levels) t.rows.push_back(level_label(k));
  t.cells.assign(levels.size(), std::vector<std::optional<double>>(t.columns.size()));

  for (std::size_t c = 0; c < manifest.engines.size(); ++c) {
    const auto& engine = manifest.engines[c];
    std::vector<std::vector<double>> per_level(levels.size());
    std::size_t judged_queries = 0;
    for (const auto& query : manifest.queries) {
      auto by_rank = mean_votes_by_rank(judgments, engine, query.id);
      if (by_rank.empty()) continue;
      ++judged_queries;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        auto r = r_at_k(by_rank, levels[l]);
        if (r.value) per_level[l].push_back(*r.value);
        if (!r.complete()) t.partial = true;
      }
    }
    if (judged_queries < manifest.queries.size()) {
      t.partial = true;
      t.flags.push_back(engine + ": " + std::to_string(judged_queries) + " of " +
                        std::to_string(manifest.queries.size()) + " queries judged");
    }
    for (std::size_t l = 0; l < levels.size(); ++l)
      if (auto m = mean(per_level[l])) t.cells[l][c] = round2(*m);
  }
  if (t.partial && t.flags.empty()) t.flags.push_back("some ranks unjudged");
  return t;
}

Table table_query(const RunManifest& manifest, std::span<const RelevanceScore> scores) {
  Table t;
  t.name = "table_query";
  t.title = "Query-level relevance (note on 10)";
  t.corner = "Topic";
  t.columns = manifest.engines;
  t.column_units.assign(t.columns.size(), "");
  for (const auto& topic : scale_to_ten(manifest, scores)) {
    t.rows.push_back(topic.label.empty() ? topic.topic_id : topic.label);
    std::vector<std::optional<double>> row(t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      auto it = topic.notes.find(t.columns[c]);
      if (it == topic.notes.end()) {
        t.partial = true;
        continue;
      }
      row[c] = it->second.value;
      if (it->second.degenerate)
        t.flags.push_back(t.rows.back() + "/" + t.columns[c] + ": constant weight pool");
    }
    t.cells.push_back(std::move(row));
  }
  return t;
}

// -- coupling ---------------------------------------------------------------------------

Weights parse_weights(std::string_view text) {
  std::vector<double> parts;
  std::string s(text);
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0' || errno != 0 || !std::isfinite(v))
      throw ValidationError("weights: not a number: '" + item + "'", "weights");
    parts.push_back(v);
  }
  if (parts.size() != 3)
    throw ValidationError("weights: expected three comma-separated values", "weights");
  return {parts[0], parts[1], parts[2]};
}

std::vector<LevelScores> level_scores(const RunManifest& manifest, const Table& performance,
                                      const Table& user, const Table& query) {
  std::vector<LevelScores> out;
  for (const auto& engine : manifest.engines) {
    LevelScores s;
    s.engine_id = engine;

    auto dead = performance.cell(engine, "Dead Links");
    auto parasite = performance.cell(engine, "Parasites Pages");
    auto redundant = performance.cell(engine, "Redundant Results");
    if (dead && parasite && redundant)
      s.system = 1.0 - (*dead + *parasite + *redundant) / 300.0;
    s.system_partial = performance.partial;

    std::vector<double> notes;
    for (const auto& row : query.rows)
      if (auto v = query.cell(row, engine)) notes.push_back(*v);
    if (auto m = mean(notes)) s.query = *m / 10.0;
    s.query_partial = query.partial || notes.size() < query.rows.size();

    if (!user.rows.empty())
      if (auto v = user.cell(user.rows.back(), engine)) s.user = *v / 5.0;
    s.user_partial = user.partial;
    out.push_back(std::move(s));
  }
  return out;
}

FinalEvaluation couple_levels(const LevelScores& levels, const Weights& weights) {
  for (double w : {weights.system, weights.query, weights.user})
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("weights must be finite and non-negative", "weights");

  FinalEvaluation out;
  out.engine_id = levels.engine_id;
  out.levels = levels;

  double sum = weights.system + weights.query + weights.user;
  if (sum <= 0.0) throw ValidationError("weights sum to zero", "weights");
  Weights w = weights;
  if (std::abs(sum - 1.0) > 1e-9) {
    w.system /= sum;
    w.query /= sum;
    w.user /= sum;
    out.flags.push_back("weights normalized to sum 1");
  }

  const struct {
    const char* name;
    const std::optional<double>& value;
    double& weight;
  } parts[] = {{"system", levels.system, w.system},
               {"query", levels.query, w.query},
               {"user", levels.user, w.user}};

  double available = 0.0;
  for (const auto& p : parts) {
    if (p.value) {
      available += p.weight;
    } else if (p.weight > 0.0) {
      out.flags.push_back(std::string(p.name) + " level missing; weight redistributed");
    }
  }
  if (available <= 0.0)
    throw ValidationError("no weight left on the available levels for " + levels.engine_id,
                          "weights");
  const bool redistribute = available < 1.0 - 1e-12;
  for (const auto& p : parts) {
    if (!p.value) {
      p.weight = 0.0;
    } else if (redistribute) {
      p.weight /= available;
    }
  }

  double score = 0.0;
  for (const auto& p : parts)
    if (p.value) score += p.weight * *p.value;
  out.coupled_score = score;
  out.weights = w;
  if (levels.system_partial || levels.query_partial || levels.user_partial)
    out.flags.push_back("built from partial data");
  return out;
}

Table table_final(std::span<const FinalEvaluation> evaluations) {
  Table t;
  t.name = "table_final";
  t.title = "Coupled evaluation";
  t.corner = "Engine";
  t.columns = {"System", "Query", "User", "Coupled"};
  t.column_units.assign(4, "");
  t.decimals = 4;
  for (const auto& e : evaluations) {
    t.rows.push_back(e.engine_id);
    auto r = [&](const std::optional<double>& v) -> std::optional<double> {
      if (!v) return std::nullopt;
      return round_to(*v, t.decimals);
    };
    t.cells.push_back({r(e.levels.system), r(e.levels.query), r(e.levels.user),
                       round_to(e.coupled_score, t.decimals)});
    for (const auto& f : e.flags) t.flags.push_back(e.engine_id + ": " + f);
    if (!e.flags.empty()) t.partial = true;
  }
  return t;
}

// -- rendering --------------------------------------------------------------------------

Format parse_format(std::string_view text) {
  if (text == "text" || text == "txt") return Format::Text;
  if (text == "csv") return Format::Csv;
  if (text == "png") return Format::Png;
  throw ValidationError("unknown format '" + std::string(text) + "'", "format");
}

std::string_view extension(Format format) {
  switch (format) {
    case Format::Text: return "txt";
    case Format::Csv: return "csv";
    case Format::Png: return "png";
  }
  return "txt";
}

namespace {

std::string number(double value, int decimals, bool comma) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  if (comma)
    for (auto& ch : s)
      if (ch == '.') ch = ',';
  return s;
}

std::string csv_field(const std::string& s, char sep) {
  if (s.find_first_of(std::string("\"\r\n") + sep) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text, char sep) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == sep) {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field", "csv");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

std::string render_text(const Table& table, const RenderOptions& options) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({table.corner});
  for (const auto& c : table.columns) grid.back().push_back(c);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> line{table.rows[r]};
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& v = table.cells[r][c];
      const std::string unit = c < table.column_units.size() ? table.column_units[c] : "";
      line.push_back(v ? number(*v, table.decimals, options.decimal_comma) + unit : "-");
    }
    grid.push_back(std::move(line));
  }

  std::vector<std::size_t> width(table.columns.size() + 1, 0);
  for (const auto& line : grid)
    for (std::size_t i = 0; i < line.size(); ++i)
      width[i] = std::max(width[i], utf8::length(line[i]));

  std::string out = table.title + "\n";
  for (std::size_t l = 0; l < grid.size(); ++l) {
    for (std::size_t i = 0; i < grid[l].size(); ++i) {
      const auto& s = grid[l][i];
      const std::string pad(width[i] - utf8::length(s), ' ');
      if (i == 0) {
        out += s + pad;
      } else {
        out += "  " + pad + s;
      }
    }
    out += '\n';
    if (l == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  if (table.partial) out += "(partial)\n";
  for (const auto& f : table.flags) out += "* " + f + '\n';
  return out;
}

std::string render_csv(const Table& table, const RenderOptions& options) {
  const char sep = options.decimal_comma ? ';' : ',';
  std::string out = csv_field(table.corner, sep);
  for (const auto& c : table.columns) out += sep + csv_field(c, sep);
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += csv_field(table.rows[r], sep);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out += sep;
      if (const auto& v = table.cells[r][c])
        out += number(*v, table.decimals, options.decimal_comma);
    }
    out += '\n';
  }
  return out;
}

Table table_from_csv(std::string_view csv, const RenderOptions& options) {
  const char sep = options.decimal_comma ? ';' : ',';
  auto records = parse_csv_records(csv, sep);
  if (records.empty()) throw ValidationError("csv: empty table", "csv");
  Table t;
  t.corner = records[0][0];
  t.columns.assign(records[0].begin() + 1, records[0].end());
  t.column_units.assign(t.columns.size(), "");
  int decimals = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != t.columns.size() + 1)
      throw ValidationError("csv: row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                                " fields, expected " + std::to_string(t.columns.size() + 1),
                            "csv");
    t.rows.push_back(rec[0]);
    std::vector<std::optional<double>> row;
    for (std::size_t c = 1; c < rec.size(); ++c) {
      if (rec[c].empty()) {
        row.emplace_back();
        continue;
      }
      std::string field = rec[c];
      for (auto& ch : field)
        if (ch == ',') ch = '.';
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw ValidationError("csv: not a number: '" + rec[c] + "'", "csv");
      if (auto dot = field.find('.'); dot != std::string::npos)
        decimals = std::max(decimals, static_cast<int>(field.size() - dot - 1));
      row.push_back(v);
    }
    t.cells.push_back(std::move(row));
  }
  t.decimals = decimals;
  return t;
}

std::filesystem::path emit(const Table& table, Format format, const std::filesystem::path& dir,
                           const RenderOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / (table.name + "." + std::string(extension(format)));
  switch (format) {
    case Format::Text:
      write_file(path, render_text(table, options));
      break;
    case Format::Csv:
      write_file(path, render_csv(table, options));
      break;
    case Format::Png: {
      // Bars cluster along the table's natural x axis: criteria for the
      // performance table, rows otherwise. Mixed units are left out.
      BarChart chart;
      chart.title = table.title;
      const bool by_column = table.name == "table_performance";
      if (by_column) {
        chart.y_label = "%";
        chart.series = table.rows;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
          if (c < table.column_units.size() && table.column_units[c] != "%") continue;
          chart.groups.push_back(table.columns[c]);
          std::vector<std::optional<double>> values;
          for (std::size_t r = 0; r < table.rows.size(); ++r) values.push_back(table.cells[r][c]);
          chart.values.push_back(std::move(values));
        }
      } else {
        chart.series = table.columns;
        chart.groups = table.rows;
        chart.values = table.cells;
        if (table.name == "table_user") chart.y_max = 5.0;
        if (table.name == "table_query") chart.y_max = 10.0;
        if (table.name == "table_final") chart.y_max = 1.0;
      }
      write_png(render_bar_chart(chart), path);
      break;
    }
  }
  return path;
}

nlohmann::json to_json_value(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      cells[table.columns[c]] = table.cells[r][c] ? nlohmann::json(*table.cells[r][c]) : nlohmann::json();
    rows.push_back({{"label", table.rows[r]}, {"cells", std::move(cells)}});
  }
  return {{"name", table.name},   {"title", table.title},     {"columns", table.columns},
          {"units", table.column_units}, {"rows", std::move(rows)}, {"partial", table.partial},
          {"flags", table.flags}};
}

}  // namespace serpeval
