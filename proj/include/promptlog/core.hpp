// Core domain vocabulary shared by every other module: raw logs, templates,
// verdicts, sessions, prompts and parsed answers. All types are plain values,
// immutable by convention after construction, and safe to share across
// threads.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace promptlog {

/// Thrown for malformed inputs, contract violations and unusable files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { Parsing, Anomaly };

std::string to_string(Task task);
Task task_from_string(const std::string& text);

/// One timestamped log line plus optional ground-truth annotations.
struct RawLog {
  std::size_t index = 0;  ///< ordinal position in its corpus (0-based, dense)
  std::string content;
  std::optional<std::string> timestamp;  ///< monotone sort key; corpus order is authoritative
  std::optional<std::string> gold_template;
  std::optional<bool> gold_anomaly;  ///< true = abnormal

  bool operator==(const RawLog&) const = default;
};

enum class TokenKind { Static, Variable };

/// One token of a log template. A Variable token always renders as "<*>".
struct Token {
  std::string text;
  TokenKind kind = TokenKind::Static;

  bool is_variable() const { return kind == TokenKind::Variable; }
  bool operator==(const Token&) const = default;
};

/// Canonical wildcard used for variable positions in templates.
inline constexpr const char* kWildcard = "<*>";

/// A parsed log template. `text` is the single-space join of the token
/// renderings, so text and tokens are a bijection.
struct LogTemplate {
  std::vector<Token> tokens;
  std::string text;

  static LogTemplate from_tokens(std::vector<Token> tokens);

  bool operator==(const LogTemplate&) const = default;
};

enum class Verdict { Normal, Abnormal };

std::string to_string(Verdict verdict);

/// Binary anomaly call plus the model's explanation. The reason may be empty
/// when the strategy does not request one.
struct AnomalyVerdict {
  Verdict label = Verdict::Normal;
  std::string reason;

  bool abnormal() const { return label == Verdict::Abnormal; }
  bool operator==(const AnomalyVerdict&) const = default;
};

/// A fixed window of consecutive templates. The session is abnormal as soon
/// as any member is.
struct Session {
  std::size_t start = 0;               ///< stream index of the first member
  std::vector<std::string> templates;  ///< member template texts, in order
  std::vector<AnomalyVerdict> verdicts;
  bool predicted_abnormal = false;
  std::optional<bool> gold_abnormal;  ///< set iff every member carries gold

  std::size_t size() const { return templates.size(); }
  bool operator==(const Session&) const = default;
};

enum class StrategyTag { Simple, Self, CotImplicit, CotExplicit, InContext };

std::string to_string(StrategyTag tag);
StrategyTag strategy_from_string(const std::string& text);

/// A fully assembled prompt: strategy prefix, the input slot filled with log
/// texts, and the answer-format directive. Assembly is deterministic; the
/// same fields always produce byte-identical prompt text.
struct PromptSpec {
  std::string prefix;
  std::vector<std::string> inputs;
  std::string answer_directive;
  double temperature = 0.5;
  StrategyTag strategy = StrategyTag::Simple;

  /// prefix + " " + input block + " " + answer directive.
  std::string assembled() const;

  bool operator==(const PromptSpec&) const = default;
};

/// One "(i) x-y" answer extracted from a model response.
struct ParsedAnswer {
  std::size_t ordinal = 0;  ///< 1-based, matches the input numbering
  std::string answer;       ///< the x-part
  std::string reason;       ///< the y-part

  bool operator==(const ParsedAnswer&) const = default;
};

}  // namespace promptlog
