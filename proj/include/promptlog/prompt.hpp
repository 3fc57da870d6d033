// Prompt construction: the input/answer format-control functions, the four
// strategy builders and greedy batching under a per-query length budget.
//
// Every string produced here is byte-deterministic and pinned by golden
// files under fixtures/golden_prompts/. Do not reword the constants below
// without regenerating the golden files.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "promptlog/core.hpp"

namespace promptlog {

// ---------------------------------------------------------------------------
// Registered texts.

/// Instruction prefix of the plain anomaly-detection prompt.
inline constexpr std::string_view kSimpleAnomalyPrefix =
    "Classify the given log entries into normal and abnormal categories:";

/// Default instruction prefix of the plain parsing prompt (configurable; a
/// selected or user-supplied prefix normally replaces it).
inline constexpr std::string_view kSimpleParsingPrefix =
    "Parse the given log entries into log templates:";

/// Sentence appended when the strategy requests per-log justifications.
inline constexpr std::string_view kExplainSuffix =
    "Concisely explain your reason for each log.";

/// Step-constrained anomaly prefix: decision steps (a)-(d) plus the
/// justification request.
inline constexpr std::string_view kCotExplicitPrefix =
    "Classify the given log entries into normal and abnormal categories. Do it with these "
    "steps: (a) Mark it normal when values (such as memory address, floating number and "
    "register value) in a log are invalid. (b) Mark it normal when lack of information. (c) "
    "Never consider 〈*〉 and missing values as abnormal patterns. (d) Mark it "
    "abnormal when and only when the alert is explicitly expressed in textual content (such "
    "as keywords like error or interrupt). Concisely explain your reason for each log.";

/// Answer-range strings for the answer-control function.
inline constexpr std::string_view kAnswerRangeAnomaly =
    "a binary choice between abnormal and normal";
inline constexpr std::string_view kAnswerRangeParsing = "a parsed log template";
inline constexpr std::string_view kAnswerRangeBinary = "a binary choice between 0 and 1";

// ---------------------------------------------------------------------------
// Format-control functions.

/// Renders the input slot for N logs:
///   "There are N logs, the logs begin: (1)L1\n (2)L2\n ... \n (N)LN"
/// Newlines inside a log are flattened to spaces so the positional "\n "
/// separator stays unambiguous. Throws Error on an empty list.
std::string input_control(const std::vector<std::string>& logs);

/// Byte length input_control() would produce for logs[first, last), without
/// building the string. Used by the batcher.
std::size_t input_control_size(const std::vector<std::string>& logs, std::size_t first,
                               std::size_t last);

/// Renders the answer-format directive for answer range `answer_range`:
///   "Organize your answer to be the following format: (1) x-y\n (2) x-y\n
///    …\n (N) x-y, where x is <answer_range> and y is the reason."
/// The directive is a fixed shape; only the answer range is substituted.
std::string answer_control(std::string_view answer_range);

/// Answer range registered for a task (parsing or anomaly verdicts).
std::string_view answer_range_for(Task task);

// ---------------------------------------------------------------------------
// Strategy builders. Each returns a PromptSpec whose assembled() text is
// prefix + " " + input_control(logs) + " " + answer_control(S).

/// A labelled demonstration pair: (log text, label text). The label is the
/// category digit for anomaly or the gold template for parsing.
struct LabelledPair {
  std::string log;
  std::string label;

  bool operator==(const LabelledPair&) const = default;
};

/// Plain instruction prompt. For parsing, `parsing_prefix` overrides the
/// registered default.
PromptSpec build_simple_prompt(Task task, const std::vector<std::string>& logs,
                               std::string_view parsing_prefix = kSimpleParsingPrefix);

enum class CotMode { Implicit, Explicit };

CotMode cot_mode_from_string(const std::string& text);

/// Step-constrained anomaly prompt. Explicit mode emits the full (a)-(d)
/// step text; implicit mode only adds the justification request to the
/// simple prefix.
PromptSpec build_cot_prompt(const std::vector<std::string>& logs, CotMode mode);

/// Demonstration prompt with m labelled pairs ahead of the inputs. Pair
/// order is preserved verbatim. Throws Error on empty pairs.
PromptSpec build_incontext_prompt(const std::vector<std::string>& logs,
                                  const std::vector<LabelledPair>& pairs, Task task);

/// Prompt with a caller-supplied prefix, normally the winner of the
/// candidate-pool selection. The answer range follows the task.
PromptSpec build_self_prompt(const std::vector<std::string>& logs, std::string selected_prefix,
                             Task task = Task::Parsing);

// ---------------------------------------------------------------------------
// Batching.

/// Greedy in-order packing: each batch takes the longest prefix of the
/// remaining logs whose assembled prompt (with the given strategy prefix and
/// answer directive) stays within `budget` bytes. Flattening the result
/// reproduces `logs` exactly. Throws Error when a single log cannot fit
/// alone.
std::vector<std::vector<std::string>> batch_logs(const std::vector<std::string>& logs,
                                                 std::size_t budget, std::string_view prefix,
                                                 std::string_view answer_directive);

}  // namespace promptlog
