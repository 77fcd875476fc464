#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace serpeval {

/// Base of every error the library raises. The exit code is what the CLI
/// returns when the error escapes a command.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code = 1)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

class PipelineOrderError : public Error {
 public:
  explicit PipelineOrderError(const std::string& what) : Error(what, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 4) {}
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string field = {})
      : Error(what, 2), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Seconds since the Unix epoch, UTC.
std::int64_t now_utc_seconds();

namespace utf8 {

/// Replaces every invalid byte sequence with U+FFFD.
std::string sanitize(std::string_view bytes);

/// Decodes one code point at `pos` and advances it. Input must be valid UTF-8.
char32_t next(std::string_view s, std::size_t& pos);

void append(std::string& out, char32_t cp);

/// Code points in valid UTF-8 text.
std::size_t length(std::string_view s);

}  // namespace utf8

/// Runs `fn(i)` for i in [0, n) on at most `max_workers` threads. The first
/// exception thrown by a task is rethrown after all workers join.
void parallel_for_bounded(std::size_t n, std::size_t max_workers,
                          const std::function<void(std::size_t)>& fn);

std::string to_hex(std::string_view bytes);

}  // namespace serpeval
