#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "serpeval/config.hpp"
#include "support/fixture_server.hpp"

namespace testsupport {

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

const std::vector<std::string>& filler_words();
const std::vector<std::string>& topic_words();

std::vector<std::string> draw(std::mt19937_64& rng, const std::vector<std::string>& from, std::size_t n);
std::string join(const std::vector<std::string>& words);

struct DeskScaleSpec {
  int topics = 6;
  int queries_per_topic = 5;
  int results = 20;
  int engines = 3;
  std::uint64_t seed = 7;
};

/// Writes fixture SERPs for every engine under `dir` and teaches `server` to
/// answer the linked pages: some dead, some duplicated within a list, some
/// without any query word. Returns a config rooted at `dir/data` with
/// politeness delays disabled.
serpeval::Config make_desk_scale(const std::filesystem::path& dir, FixtureServer& server,
                                 const DeskScaleSpec& spec = {});

}  // namespace testsupport
