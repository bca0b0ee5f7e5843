#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dup/answer.hpp"

namespace duprompt::data {

/// Bad dataset contents. `line()` is the 1-based line (JSON Lines) or record
/// number (JSON array); 0 when not tied to a record.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (record " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Option {
  char letter = 'A';
  std::string text;
  bool operator==(const Option&) const = default;
};

struct Problem {
  std::string id;
  std::string dataset;
  // Text shown to the model; for option datasets it ends with the answer
  // choices ("Answer Choices: (A) ... (B) ...").
  std::string question;
  std::string gold_raw;
  NormalizedAnswer gold;
  AnswerType answer_type;
  std::vector<Option> options;
};

/// Where each field lives inside one record, as JSON pointers.
struct FieldMap {
  std::string records;                // array inside a whole-file object ("" = none)
  std::vector<std::string> question;  // joined with a single space
  std::string answer;
  std::string id;       // optional; defaults to "<dataset>-<index>"
  std::string options;  // optional
};

struct DatasetInfo {
  std::string id;
  AnswerType answer_type;
  std::size_t expected_count;
  FieldMap fields;
};

/// The ten supported benchmarks, keyed by canonical id.
const std::map<std::string, DatasetInfo>& known_datasets();

/// Lower-cases and maps '-' to '_' ("Coin-Flip" -> "coin_flip").
std::string canonical_dataset_id(std::string_view name);

struct LoadOptions {
  std::optional<AnswerType> answer_type;  // required for unknown ids
  std::optional<FieldMap> fields;         // overrides the built-in map
};

struct LoadedDataset {
  std::vector<Problem> problems;
  std::vector<std::string> warnings;
};

/// Reads JSON Lines, a JSON array, or a JSON object holding the record array
/// at `fields.records`. Records keep file order.
LoadedDataset load_dataset(const std::filesystem::path& path, std::string_view dataset,
                           const LoadOptions& options = {});

/// Gold-label parsing:
///   number  - text after the last "#### " if present, commas stripped
///   option  - a single letter A-E, optionally parenthesized
///   yes_no  - yes / no / true / false, any case
///   string  - trimmed and lower-cased
/// Throws DatasetError naming the offending value.
NormalizedAnswer parse_gold_answer(std::string_view raw, AnswerType answer_type);

/// Manifest: {"datasets": {"<id>": {"path": "...", "answer_type": "...",
/// "fields": {...}}}}. Relative paths resolve against the manifest's folder.
struct ManifestEntry {
  std::filesystem::path path;
  LoadOptions options;
};

std::map<std::string, ManifestEntry> load_manifest(const std::filesystem::path& manifest);

}  // namespace duprompt::data
