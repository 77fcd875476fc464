#include "support/oracle.hpp"

#include <cmath>

namespace oracle {

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += " " + w;
  return out + " ";
}

std::size_t occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1))
    ++n;
  return n;
}

std::vector<double> score(const std::vector<std::vector<std::string>>& docs,
                          const std::vector<std::vector<std::string>>& groups, std::size_t query_len) {
  const double tnrd = static_cast<double>(docs.size());
  std::vector<double> out(docs.size(), 0.0);
  for (const auto& g : groups) {
    const std::string needle = join(g);
    std::vector<std::size_t> freq;
    double ndwg = 0;
    for (const auto& d : docs) {
      freq.push_back(occurrences(join(d), needle));
      if (freq.back() > 0) ndwg += 1;
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (freq[i] == 0 || docs[i].empty()) continue;
      const double glen = static_cast<double>(g.size());
      out[i] += static_cast<double>(freq[i]) / static_cast<double>(docs[i].size()) * glen * glen /
                static_cast<double>(query_len) * std::log2(tnrd / ndwg);
    }
  }
  return out;
}

}  // namespace

std::vector<double> weights(const std::vector<std::vector<std::string>>& docs,
                            const std::vector<std::string>& query, bool exact) {
  std::vector<std::vector<std::string>> groups;
  if (exact) {
    groups.push_back(query);
  } else {
    for (std::size_t len = query.size(); len >= 1; --len)
      groups.emplace_back(query.begin(), query.begin() + static_cast<std::ptrdiff_t>(len));
  }
  return score(docs, groups, query.size());
}

std::vector<double> full_group_contribution(const std::vector<std::vector<std::string>>& docs,
                                            const std::vector<std::string>& query) {
  return score(docs, {query}, query.size());
}

std::size_t redundant_count(const std::vector<std::string>& ids) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) seen = seen || ids[j] == ids[i];
    if (seen) ++n;
  }
  return n;
}

std::optional<double> r_at_k(const std::map<int, double>& by_rank, int k) {
  double sum = 0;
  int n = 0;
  for (int r = 1; r <= k; ++r) {
    auto it = by_rank.find(r);
    if (it == by_rank.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace oracle
