#include "promptlog/metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace promptlog {
namespace {

std::size_t pairs_of(std::size_t n) { return n * (n - 1) / 2; }

/// Maps arbitrary cluster labels onto dense integer ids.
template <typename T>
std::vector<std::size_t> discretize(const std::vector<T>& labels) {
  std::unordered_map<T, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const T& label : labels) {
    auto [it, _] = ids.emplace(label, ids.size());
    out.push_back(it->second);
  }
  return out;
}

/// Rand index via the contingency table: agreements are the pairs clustered
/// together in both assignments plus the pairs apart in both.
double rand_index_impl(const std::vector<std::size_t>& pred,
                       const std::vector<std::size_t>& gold) {
  if (pred.size() != gold.size()) throw Error("rand_index: assignments differ in length");
  const std::size_t n = pred.size();
  if (n < 2) throw Error("rand_index: need at least 2 items");

  const std::size_t pred_clusters = 1 + *std::max_element(pred.begin(), pred.end());
  const std::size_t gold_clusters = 1 + *std::max_element(gold.begin(), gold.end());
  std::vector<std::size_t> pred_sizes(pred_clusters, 0);
  std::vector<std::size_t> gold_sizes(gold_clusters, 0);
  std::unordered_map<std::size_t, std::size_t> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ++pred_sizes[pred[i]];
    ++gold_sizes[gold[i]];
    ++cells[pred[i] * gold_clusters + gold[i]];
  }

  std::size_t together_both = 0;
  for (const auto& [_, count] : cells) together_both += pairs_of(count);
  std::size_t together_pred = 0;
  for (std::size_t size : pred_sizes) together_pred += pairs_of(size);
  std::size_t together_gold = 0;
  for (std::size_t size : gold_sizes) together_gold += pairs_of(size);

  const std::size_t total = pairs_of(n);
  const std::size_t agreements = total + 2 * together_both - together_pred - together_gold;
  return static_cast<double>(agreements) / static_cast<double>(total);
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  tn += other.tn;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

std::string to_string(ReportLevel level) {
  switch (level) {
    case ReportLevel::Token: return "token";
    case ReportLevel::Session: return "session";
    case ReportLevel::Template: return "template";
  }
  throw Error("unreachable report level");
}

EvalReport report_from_counts(const ConfusionCounts& counts, Task task, ReportLevel level,
                              std::size_t n_items) {
  EvalReport report;
  report.task = task;
  report.level = level;
  report.n_items = n_items;
  if (counts.tp + counts.fp > 0) {
    report.precision =
        static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn > 0) {
    report.recall = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  }
  if (report.precision && report.recall) {
    const double p = *report.precision;
    const double r = *report.recall;
    report.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return report;
}

ConfusionCounts parsing_token_confusion(const LogTemplate& pred, const LogTemplate& gold) {
  ConfusionCounts counts;
  const std::size_t length = std::max(pred.tokens.size(), gold.tokens.size());
  for (std::size_t i = 0; i < length; ++i) {
    // Positional alignment; the shorter side reads as static past its tail.
    const bool pred_variable = i < pred.tokens.size() && pred.tokens[i].is_variable();
    const bool gold_variable = i < gold.tokens.size() && gold.tokens[i].is_variable();
    if (gold_variable && pred_variable) {
      ++counts.tp;
    } else if (!gold_variable && !pred_variable) {
      ++counts.tn;
    } else if (!gold_variable && pred_variable) {
      ++counts.fp;
    } else {
      ++counts.fn;
    }
  }
  return counts;
}

EvalReport parsing_f1(const std::vector<std::pair<LogTemplate, LogTemplate>>& pairs) {
  if (pairs.empty()) throw Error("parsing_f1: no template pairs");
  ConfusionCounts total;
  for (const auto& [pred, gold] : pairs) total += parsing_token_confusion(pred, gold);
  return report_from_counts(total, Task::Parsing, ReportLevel::Token, pairs.size());
}

double rand_index(const std::vector<std::string>& pred_assignment,
                  const std::vector<std::string>& gold_assignment) {
  return rand_index_impl(discretize(pred_assignment), discretize(gold_assignment));
}

double rand_index(const std::vector<int>& pred_assignment,
                  const std::vector<int>& gold_assignment) {
  return rand_index_impl(discretize(pred_assignment), discretize(gold_assignment));
}

std::vector<Session> group_sessions(const std::vector<TemplateObservation>& stream,
                                    std::size_t window) {
  if (window < 1) throw Error("group_sessions: window must be at least 1");
  if (stream.empty()) throw Error("group_sessions: empty template stream");

  std::vector<Session> sessions;
  sessions.reserve((stream.size() + window - 1) / window);
  for (std::size_t start = 0; start < stream.size(); start += window) {
    const std::size_t end = std::min(start + window, stream.size());
    Session session;
    session.start = start;
    bool all_gold = true;
    bool any_gold_abnormal = false;
    for (std::size_t i = start; i < end; ++i) {
      session.templates.push_back(stream[i].template_text);
      session.verdicts.push_back(stream[i].predicted);
      session.predicted_abnormal |= stream[i].predicted.abnormal();
      if (stream[i].gold_abnormal) {
        any_gold_abnormal |= *stream[i].gold_abnormal;
      } else {
        all_gold = false;
      }
    }
    if (all_gold) session.gold_abnormal = any_gold_abnormal;
    sessions.push_back(std::move(session));
  }
  return sessions;
}

EvalReport anomaly_f1(const std::vector<bool>& pred_labels, const std::vector<bool>& gold_labels,
                      ReportLevel level) {
  if (pred_labels.size() != gold_labels.size()) {
    throw Error("anomaly_f1: label lists differ in length");
  }
  ConfusionCounts counts;
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    if (gold_labels[i] && pred_labels[i]) {
      ++counts.tp;
    } else if (!gold_labels[i] && !pred_labels[i]) {
      ++counts.tn;
    } else if (!gold_labels[i] && pred_labels[i]) {
      ++counts.fp;
    } else {
      ++counts.fn;
    }
  }
  return report_from_counts(counts, Task::Anomaly, level, pred_labels.size());
}

double prompt_score(const EvalReport& report) {
  if (!report.f1 || !report.rand_index) {
    throw Error("prompt_score: needs both F1 and Rand index");
  }
  return (*report.rand_index + *report.f1) / 2.0;
}

RatingSummary rating_summary(const std::vector<int>& scores, int threshold, HipMode mode) {
  if (scores.empty()) throw Error("rating_summary: no scores");
  double sum = 0.0;
  std::size_t high = 0;
  for (int score : scores) {
    if (score < 1 || score > 5) {
      throw Error("rating_summary: score out of range 1..5: " + std::to_string(score));
    }
    sum += score;
    if (mode == HipMode::AtLeast ? score >= threshold : score > threshold) ++high;
  }
  RatingSummary summary;
  summary.mean = sum / static_cast<double>(scores.size());
  summary.hip = static_cast<double>(high) / static_cast<double>(scores.size());
  return summary;
}

}  // namespace promptlog
