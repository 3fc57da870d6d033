// End-to-end orchestration: the run commands behind the CLI. Each run writes
// one directory with a config snapshot, line-delimited prediction records and
// run records, reports and a human-readable summary.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptlog/corpus.hpp"
#include "promptlog/gateway.hpp"
#include "promptlog/metrics.hpp"
#include "promptlog/selection.hpp"

namespace promptlog {

/// Exit-code contract shared by the commands and the CLI.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;  ///< some batches failed, within the failure budget

struct RunConfig {
  Task task = Task::Parsing;

  std::filesystem::path corpus_path;
  CorpusFormat format;
  std::string corpus_name;

  /// Chronological split; the pipeline runs on the test suffix. At most one
  /// of ratio/count may be set; unset means the whole corpus.
  std::optional<double> split_ratio;
  std::optional<std::size_t> split_count;

  StrategyTag strategy = StrategyTag::Simple;
  CotMode cot_mode = CotMode::Explicit;
  std::size_t incontext_m = 0;  ///< 0 = task default (20 for anomaly, 3 for parsing)
  std::uint64_t seed = 17;
  std::filesystem::path prefix_file;     ///< self strategy / simple-parsing override
  std::filesystem::path pool_file;       ///< select: candidate pool
  std::filesystem::path templates_file;  ///< detect: template-assignment file
  std::size_t calibration = 100;         ///< select: head-slice size

  std::size_t budget = 4000;  ///< max bytes of one assembled prompt
  std::size_t window = 100;   ///< detect: session window length

  /// Failed batches are skipped and recorded; once their count exceeds this
  /// budget the run aborts. Unset = unlimited.
  std::optional<std::size_t> failure_budget;

  BackendConfig backend;
  std::filesystem::path out_dir;
};

struct RunOutcome {
  int exit_code = kExitSuccess;
  std::filesystem::path run_dir;
  std::vector<EvalReport> reports;
  std::size_t predicted = 0;
  std::size_t failed_batches = 0;
};

/// Predicts a template (with reason) for every test log; evaluates token F1
/// and Rand index when gold templates exist.
RunOutcome cmd_parse(const RunConfig& config);

/// Predicts a verdict for every template in the stream, groups sessions at
/// the configured window, and reports template- and session-level F1 when
/// gold tags exist. The stream comes from the template-assignment file when
/// given, else from the corpus gold-template column, else from the content
/// column; duplicate template texts collapse to their first occurrence (a
/// deduplicated template is gold-abnormal iff any occurrence is).
RunOutcome cmd_detect(const RunConfig& config);

/// Scores every pool candidate on the calibration slice and persists the
/// SelectionResult.
RunOutcome cmd_select(const RunConfig& config);

struct ExportConfig {
  std::filesystem::path run_dir;
  std::filesystem::path out_file;  ///< defaults to <run_dir>/annotations.csv
  std::size_t sample = 0;
  std::uint64_t seed = 17;
};

/// Emits a rating sheet from a run's prediction records: sampled rows with
/// blank usefulness/readability columns, headed by the scoring rubric.
/// Anomaly samples are class-balanced across predicted verdicts; when gold
/// labels exist only correctly predicted records qualify. Parsing samples
/// must contain at least one variable.
int cmd_export_annotations(const ExportConfig& config);

struct ScoreConfig {
  std::filesystem::path sheet;
  std::filesystem::path out_file;  ///< defaults to stdout only
  int threshold = 4;
};

/// Aggregates a filled rating sheet into Mean and HIP per dimension, in both
/// threshold modes.
int cmd_score_annotations(const ScoreConfig& config);

}  // namespace promptlog
