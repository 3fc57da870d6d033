// Log dataset loading, chronological splits, calibration slices and
// balanced in-context example sampling.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "promptlog/core.hpp"
#include "promptlog/prompt.hpp"

namespace promptlog {

class CorpusError : public Error {
 public:
  using Error::Error;
};

enum class ColumnKind { Content, Template, Anomaly, Timestamp };

/// Shape of a corpus file: delimiter-separated text, one log per line.
/// Columns are declared either up front or by a header line whose cells are
/// taken from {content, template, anomaly, timestamp}.
struct CorpusFormat {
  char delimiter = '\t';
  bool header = false;
  std::vector<ColumnKind> columns;  ///< required when header is false

  static CorpusFormat tsv(std::vector<ColumnKind> columns);
  static CorpusFormat csv(std::vector<ColumnKind> columns);
  /// Parses a descriptor like "tsv:content,template" or "csv:header".
  static CorpusFormat parse(const std::string& descriptor);
};

struct Corpus {
  std::string name;
  std::vector<RawLog> logs;
  bool has_templates = false;
  bool has_anomaly_labels = false;

  std::size_t size() const { return logs.size(); }
};

/// Chronological partition of a corpus: `train` is a prefix, `test` the
/// remaining suffix.
struct Split {
  std::vector<RawLog> train;
  std::vector<RawLog> test;
  double ratio = 0.0;
};

/// Reads a corpus file. Logs keep file order and receive dense 0-based
/// indices. Label flags are set from the declared columns; a declared label
/// column must be populated on every line. Timestamps, when present, must be
/// non-decreasing in file order. Errors carry the offending line number.
Corpus load_corpus(const std::filesystem::path& path, const CorpusFormat& format,
                   std::string name = "");

/// train = first floor(ratio * N) logs, test = remainder, no shuffling.
Split chronological_split(const Corpus& corpus, double ratio);

/// Absolute-count variant: |train| = min(k, N).
Split split_at(const Corpus& corpus, std::size_t k);

/// First min(n, N) logs.
std::vector<RawLog> head_slice(const Corpus& corpus, std::size_t n);

/// Draws m labelled demonstration pairs, deterministically for a given seed.
/// Anomaly: exactly ceil(m/2) abnormal and floor(m/2) normal logs, labels
/// rendered "1"/"0", interleaved abnormal-first; sampling is uniform without
/// replacement within each class. Parsing: m (log, gold template) pairs.
/// Throws CorpusError when the corpus lacks the labels the task needs or a
/// class has too few members.
std::vector<LabelledPair> sample_incontext_pairs(const Corpus& corpus, std::size_t m, Task task,
                                                 std::uint64_t seed);

/// Reads a template-assignment file (external parser output): tab-separated
/// "index<TAB>template text" lines mapping a log index to its template.
std::vector<std::pair<std::size_t, std::string>> load_template_assignments(
    const std::filesystem::path& path);

}  // namespace promptlog
