#pragma once

#include "dpmseq/types.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace dpmseq::cli {

/// Malformed input; the message starts with "line N:" (1-based).
class IngestError : public std::runtime_error {
public:
  IngestError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct IngestOptions {
  /// Unset: the first data line is a header when none of its fields parse
  /// as numbers.
  std::optional<bool> header;
  /// Unset: a trailing label column exists when the header names it "label".
  std::optional<bool> label_column;
  char delimiter = ',';
};

/// Lines starting with '#' or "//" and blank lines are skipped.
[[nodiscard]] Dataset parse_dataset(std::istream& in,
                                    const IngestOptions& opts = {});
[[nodiscard]] Dataset ingest(const std::string& path,
                             const IngestOptions& opts = {});

} // namespace dpmseq::cli
