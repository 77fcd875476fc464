#include "serpeval/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace serpeval {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

WordGroupHierarchy build_hierarchy(std::string query_id, std::vector<std::string> words,
                                   bool exact_mode) {
  if (words.empty()) throw ValidationError("query '" + query_id + "' has no words", "query");
  WordGroupHierarchy h;
  h.query_id = std::move(query_id);
  h.exact_mode = exact_mode;
  h.query_length = words.size();
  if (exact_mode) {
    h.groups.push_back(std::move(words));
    return h;
  }
  for (std::size_t len = words.size(); len >= 1; --len)
    h.groups.emplace_back(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(len));
  return h;
}

WordGroupHierarchy build_hierarchy(const QuerySpec& query) {
  return build_hierarchy(query.id, query.words(), query.exact_mode);
}

OccurrenceIndex build_index(std::span<const DocumentText> docs, const WordGroupHierarchy& h) {
  OccurrenceIndex index;
  index.total_documents = docs.size();
  index.documents_with_group.assign(h.groups.size(), 0);
  index.frequency.reserve(docs.size());
  index.document_length.reserve(docs.size());
  for (const auto& doc : docs) {
    std::vector<std::size_t> row(h.groups.size());
    for (std::size_t g = 0; g < h.groups.size(); ++g) {
      row[g] = count_group(doc.tokens, h.groups[g]);
      if (row[g] > 0) ++index.documents_with_group[g];
    }
    index.frequency.push_back(std::move(row));
    index.document_length.push_back(doc.length());
  }
  return index;
}

double group_contribution(std::size_t frequency, std::size_t doc_length, std::size_t group_length,
                          std::size_t query_length, std::size_t tnrd, std::size_t ndwg) {
  if (frequency == 0 || ndwg == 0 || doc_length == 0 || query_length == 0) return 0.0;
  const double term_frequency = static_cast<double>(frequency) / static_cast<double>(doc_length);
  const double group_factor = static_cast<double>(group_length * group_length) /
                              static_cast<double>(query_length);
  const double rarity = std::log2(static_cast<double>(tnrd) / static_cast<double>(ndwg));
  return term_frequency * group_factor * rarity;
}

RelevanceScore compute_weight(const WordGroupHierarchy& h, const OccurrenceIndex& index,
                              std::size_t doc) {
  RelevanceScore score;
  score.total_documents = index.total_documents;
  score.document_length = index.document_length.at(doc);
  score.degenerate = score.document_length == 0;
  const auto& row = index.frequency.at(doc);
  for (std::size_t g = 0; g < h.groups.size(); ++g) {
    GroupContribution c;
    c.group = join(h.groups[g]);
    c.group_length = h.groups[g].size();
    c.frequency = row[g];
    c.documents_with_group = index.documents_with_group[g];
    c.contribution = group_contribution(c.frequency, score.document_length, c.group_length,
                                        h.query_length, index.total_documents,
                                        c.documents_with_group);
    score.weight += c.contribution;
    score.contributions.push_back(std::move(c));
  }
  return score;
}

RelevanceScore compute_weight(const WordGroupHierarchy& h, const DocumentText& doc,
                              const OccurrenceIndex& index) {
  OccurrenceIndex single;
  single.total_documents = index.total_documents;
  single.documents_with_group = index.documents_with_group;
  std::vector<std::size_t> row(h.groups.size());
  for (std::size_t g = 0; g < h.groups.size(); ++g) row[g] = count_group(doc.tokens, h.groups[g]);
  single.frequency.push_back(std::move(row));
  single.document_length.push_back(doc.length());
  auto score = compute_weight(h, single, 0);
  score.url = doc.url;
  return score;
}

std::vector<RelevanceScore> rank_group(std::vector<RelevanceScore> scores) {
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.rank < b.rank;
  });
  return scores;
}

// -- note on 10 ---------------------------------------------------------------------

double round2(double value) { return std::round(value * 100.0) / 100.0; }

std::map<std::string, Note> query_notes(const std::map<std::string, std::vector<double>>& weights) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& [engine, list] : weights) {
    for (double w : list) {
      if (!any) {
        lo = hi = w;
        any = true;
      }
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  std::map<std::string, Note> notes;
  for (const auto& [engine, list] : weights) {
    if (list.empty()) continue;
    if (hi <= lo) {
      notes[engine] = Note{5.0, true};
      continue;
    }
    double sum = 0.0;
    for (double w : list) sum += (w - lo) / (hi - lo);
    notes[engine] = Note{10.0 * sum / static_cast<double>(list.size()), false};
  }
  return notes;
}

std::vector<TopicNotes> scale_to_ten(const RunManifest& manifest,
                                     std::span<const RelevanceScore> scores) {
  // query -> engine -> weights
  std::map<std::string, std::map<std::string, std::vector<double>>> pools;
  for (const auto& s : scores) pools[s.query_id][s.engine_id].push_back(s.weight);

  std::vector<TopicNotes> rows;
  for (const auto& topic : manifest.topics) {
    TopicNotes row;
    row.topic_id = topic.id;
    row.label = topic.label;
    std::map<std::string, std::pair<double, std::size_t>> sums;
    std::map<std::string, bool> degenerate;
    for (const auto& query : manifest.queries) {
      if (query.topic_id != topic.id) continue;
      ++row.queries;
      auto it = pools.find(query.id);
      if (it == pools.end()) continue;
      for (const auto& [engine, note] : query_notes(it->second)) {
        sums[engine].first += note.value;
        sums[engine].second += 1;
        degenerate[engine] = degenerate[engine] || note.degenerate;
      }
    }
    for (const auto& [engine, acc] : sums)
      row.notes[engine] =
          Note{round2(acc.first / static_cast<double>(acc.second)), degenerate[engine]};
    rows.push_back(std::move(row));
  }
  return rows;
}

// -- serialization --------------------------------------------------------------------

std::string to_ndjson(std::span<const RelevanceScore> scores, const RunManifest& manifest) {
  std::ostringstream out;
  for (const auto& s : scores) {
    json contributions = json::array();
    for (const auto& c : s.contributions)
      contributions.push_back({{"group", c.group},
                               {"length", c.group_length},
                               {"frequency", c.frequency},
                               {"ndwg", c.documents_with_group},
                               {"contribution", c.contribution}});
    const QuerySpec* q = manifest.find_query(s.query_id);
    json j{{"engine", s.engine_id},
           {"query", s.query_id},
           {"topic", q ? q->topic_id : std::string()},
           {"rank", s.rank},
           {"url", s.url},
           {"weight", s.weight},
           {"tnrd", s.total_documents},
           {"length", s.document_length},
           {"degenerate", s.degenerate},
           {"contributions", contributions}};
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<RelevanceScore> relevance_scores_from_ndjson(std::string_view text) {
  std::vector<RelevanceScore> scores;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      RelevanceScore s;
      s.engine_id = j.at("engine");
      s.query_id = j.at("query");
      s.rank = j.at("rank");
      s.url = j.at("url");
      s.weight = j.at("weight");
      s.total_documents = j.at("tnrd");
      s.document_length = j.at("length");
      s.degenerate = j.at("degenerate");
      for (const auto& c : j.at("contributions"))
        s.contributions.push_back({c.at("group"), c.at("length"), c.at("frequency"), c.at("ndwg"),
                                   c.at("contribution")});
      scores.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw IoError("relevance_scores.ndjson line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return scores;
}

}  // namespace serpeval
