// Every metric the pipeline reports: token-level parsing F1, Rand index,
// fixed-window session grouping, session- and template-level anomaly F1,
// the prompt-selection score and rating summaries.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "promptlog/core.hpp"

namespace promptlog {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

enum class ReportLevel { Token, Session, Template };

std::string to_string(ReportLevel level);

/// Metric bundle for one evaluation. Components with a zero denominator are
/// left unset (reported as undefined) rather than coerced to 0.
struct EvalReport {
  Task task = Task::Parsing;
  ReportLevel level = ReportLevel::Token;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> rand_index;  ///< parsing only, when clustering was scored
  std::size_t n_items = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Derives precision/recall/F1 from counts. F1 is the harmonic mean when
/// both sides are defined, 0 when either side is 0, and undefined when a
/// denominator is empty.
EvalReport report_from_counts(const ConfusionCounts& counts, Task task, ReportLevel level,
                              std::size_t n_items);

/// Per-token confusion for one (prediction, gold) template pair. Tokens are
/// aligned positionally; the shorter list is padded with static sentinels at
/// the tail. The variable tag is the positive class.
ConfusionCounts parsing_token_confusion(const LogTemplate& pred, const LogTemplate& gold);

/// Micro-averaged token F1 over all pairs: counts are summed first, then one
/// precision/recall/F1 is computed. Throws Error on empty input.
EvalReport parsing_f1(const std::vector<std::pair<LogTemplate, LogTemplate>>& pairs);

/// Rand index of two clusterings given as per-item cluster assignments:
/// the fraction of the C(N,2) unordered pairs on which the assignments
/// agree (together in both, or apart in both). Throws Error when N < 2 or
/// the assignments differ in length.
double rand_index(const std::vector<std::string>& pred_assignment,
                  const std::vector<std::string>& gold_assignment);
double rand_index(const std::vector<int>& pred_assignment,
                  const std::vector<int>& gold_assignment);

/// One template occurrence in a detection stream: the predicted verdict plus
/// the optional gold tag.
struct TemplateObservation {
  std::string template_text;
  AnomalyVerdict predicted;
  std::optional<bool> gold_abnormal;

  bool operator==(const TemplateObservation&) const = default;
};

/// Groups a template stream into consecutive non-overlapping windows; the
/// last window may be short. A session is abnormal (predicted or gold) iff
/// any member is. Throws Error on an empty stream or window < 1.
std::vector<Session> group_sessions(const std::vector<TemplateObservation>& stream,
                                    std::size_t window = 100);

/// Binary F1 over equal-length label lists with abnormal as the positive
/// class. `level` only tags the report.
EvalReport anomaly_f1(const std::vector<bool>& pred_labels, const std::vector<bool>& gold_labels,
                      ReportLevel level);

/// Prompt-selection score: the average of Rand index and token F1. Throws
/// Error when either component is undefined.
double prompt_score(const EvalReport& report);

enum class HipMode { AtLeast, Strict };

struct RatingSummary {
  double mean = 0.0;
  double hip = 0.0;  ///< fraction of ratings at/above (AtLeast) or above (Strict) the threshold
};

/// Mean and high-interpretability percentage of 1..5 ratings. Throws Error
/// on an empty list or an out-of-range score.
RatingSummary rating_summary(const std::vector<int>& scores, int threshold = 4,
                             HipMode mode = HipMode::AtLeast);

}  // namespace promptlog
