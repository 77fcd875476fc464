#pragma once

// Reference implementations written independently of the library, used as
// test oracles. They favour obviousness over speed.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

/// Weight of every document of one scope, counting word groups by substring
/// search over the space-joined token stream.
std::vector<double> weights(const std::vector<std::vector<std::string>>& docs,
                            const std::vector<std::string>& query, bool exact);

/// Contribution of the full query group alone, same counting.
std::vector<double> full_group_contribution(const std::vector<std::vector<std::string>>& docs,
                                            const std::vector<std::string>& query);

/// Duplicates beyond the first, by pairwise comparison of ground-truth ids.
std::size_t redundant_count(const std::vector<std::string>& ids);

/// Mean of present values over ranks 1..k.
std::optional<double> r_at_k(const std::map<int, double>& by_rank, int k);

}  // namespace oracle
