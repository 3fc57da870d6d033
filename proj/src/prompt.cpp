#include "promptlog/prompt.hpp"

#include <algorithm>

namespace promptlog {
namespace {

constexpr std::string_view kInputHead = "There are ";
constexpr std::string_view kInputTail = " logs, the logs begin: ";
constexpr std::string_view kInputSeparator = "\n ";

std::string flatten_newlines(std::string_view log) {
  std::string out(log);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::size_t digits(std::size_t n) {
  std::size_t count = 1;
  while (n >= 10) {
    n /= 10;
    ++count;
  }
  return count;
}

std::string incontext_examples(const std::vector<LabelledPair>& pairs,
                               std::string_view label_marker) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) out += ' ';
    out += '(';
    out += std::to_string(i + 1);
    out += ") Log: ";
    out += flatten_newlines(pairs[i].log);
    out += ' ';
    out += label_marker;
    out += ' ';
    out += flatten_newlines(pairs[i].label);
  }
  out += '.';
  return out;
}

}  // namespace

std::string input_control(const std::vector<std::string>& logs) {
  if (logs.empty()) throw Error("input_control: log list is empty");
  std::string out(kInputHead);
  out += std::to_string(logs.size());
  out += kInputTail;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (i > 0) out += kInputSeparator;
    out += '(';
    out += std::to_string(i + 1);
    out += ')';
    out += flatten_newlines(logs[i]);
  }
  return out;
}

std::size_t input_control_size(const std::vector<std::string>& logs, std::size_t first,
                               std::size_t last) {
  last = std::min(last, logs.size());
  if (first >= last) throw Error("input_control_size: empty range");
  const std::size_t count = last - first;
  std::size_t size = kInputHead.size() + digits(count) + kInputTail.size();
  size += kInputSeparator.size() * (count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    size += 2 + digits(i + 1) + logs[first + i].size();
  }
  return size;
}

std::string answer_control(std::string_view answer_range) {
  if (answer_range.empty()) throw Error("answer_control: empty answer range");
  std::string out =
      "Organize your answer to be the following format: (1) x-y\n (2) x-y\n …\n (N) "
      "x-y, where x is ";
  out += answer_range;
  out += " and y is the reason.";
  return out;
}

std::string_view answer_range_for(Task task) {
  return task == Task::Parsing ? kAnswerRangeParsing : kAnswerRangeAnomaly;
}

PromptSpec build_simple_prompt(Task task, const std::vector<std::string>& logs,
                               std::string_view parsing_prefix) {
  PromptSpec spec;
  spec.strategy = StrategyTag::Simple;
  spec.prefix = task == Task::Anomaly ? std::string(kSimpleAnomalyPrefix)
                                      : std::string(parsing_prefix);
  spec.inputs = logs;
  spec.answer_directive = answer_control(answer_range_for(task));
  spec.assembled();  // validates non-empty inputs eagerly
  return spec;
}

CotMode cot_mode_from_string(const std::string& text) {
  if (text == "implicit") return CotMode::Implicit;
  if (text == "explicit") return CotMode::Explicit;
  throw Error("unknown cot mode: " + text);
}

PromptSpec build_cot_prompt(const std::vector<std::string>& logs, CotMode mode) {
  PromptSpec spec;
  if (mode == CotMode::Explicit) {
    spec.strategy = StrategyTag::CotExplicit;
    spec.prefix = std::string(kCotExplicitPrefix);
  } else {
    spec.strategy = StrategyTag::CotImplicit;
    spec.prefix = std::string(kSimpleAnomalyPrefix);
    spec.prefix += ' ';
    spec.prefix += kExplainSuffix;
  }
  spec.inputs = logs;
  spec.answer_directive = answer_control(kAnswerRangeAnomaly);
  spec.assembled();
  return spec;
}

PromptSpec build_incontext_prompt(const std::vector<std::string>& logs,
                                  const std::vector<LabelledPair>& pairs, Task task) {
  if (pairs.empty()) throw Error("build_incontext_prompt: no labelled pairs");
  PromptSpec spec;
  spec.strategy = StrategyTag::InContext;
  if (task == Task::Anomaly) {
    spec.prefix =
        "Classify the given log entries into 0 and 1 categories based on semantic similarity "
        "to the following labelled example logs: ";
    spec.prefix += incontext_examples(pairs, "Category:");
    spec.answer_directive = answer_control(kAnswerRangeBinary);
  } else {
    spec.prefix =
        "Parse the given log entries into log templates based on semantic similarity to the "
        "following labelled example logs: ";
    spec.prefix += incontext_examples(pairs, "Template:");
    spec.answer_directive = answer_control(kAnswerRangeParsing);
  }
  spec.inputs = logs;
  spec.assembled();
  return spec;
}

PromptSpec build_self_prompt(const std::vector<std::string>& logs, std::string selected_prefix,
                             Task task) {
  if (selected_prefix.empty()) throw Error("build_self_prompt: empty prefix");
  PromptSpec spec;
  spec.strategy = StrategyTag::Self;
  spec.prefix = std::move(selected_prefix);
  spec.inputs = logs;
  spec.answer_directive = answer_control(answer_range_for(task));
  spec.assembled();
  return spec;
}

std::vector<std::vector<std::string>> batch_logs(const std::vector<std::string>& logs,
                                                 std::size_t budget, std::string_view prefix,
                                                 std::string_view answer_directive) {
  // assembled = prefix + " " + input block + " " + directive
  const std::size_t scaffold = prefix.size() + 1 + 1 + answer_directive.size();
  std::vector<std::vector<std::string>> batches;
  std::size_t start = 0;
  while (start < logs.size()) {
    std::size_t end = start + 1;
    if (scaffold + input_control_size(logs, start, end) > budget) {
      throw Error("batch_logs: log at index " + std::to_string(start) +
                  " does not fit in the budget alone");
    }
    while (end < logs.size() &&
           scaffold + input_control_size(logs, start, end + 1) <= budget) {
      ++end;
    }
    batches.emplace_back(logs.begin() + static_cast<std::ptrdiff_t>(start),
                         logs.begin() + static_cast<std::ptrdiff_t>(end));
    start = end;
  }
  return batches;
}

}  // namespace promptlog
