#include "promptlog/core.hpp"

#include "promptlog/prompt.hpp"

namespace promptlog {

std::string to_string(Task task) {
  return task == Task::Parsing ? "parsing" : "anomaly";
}

Task task_from_string(const std::string& text) {
  if (text == "parsing" || text == "parse") return Task::Parsing;
  if (text == "anomaly" || text == "detect") return Task::Anomaly;
  throw Error("unknown task: " + text);
}

LogTemplate LogTemplate::from_tokens(std::vector<Token> tokens) {
  LogTemplate result;
  result.text.reserve(tokens.size() * 8);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) result.text += ' ';
    result.text += tokens[i].is_variable() ? kWildcard : tokens[i].text;
  }
  result.tokens = std::move(tokens);
  return result;
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::Abnormal ? "abnormal" : "normal";
}

std::string to_string(StrategyTag tag) {
  switch (tag) {
    case StrategyTag::Simple: return "simple";
    case StrategyTag::Self: return "self";
    case StrategyTag::CotImplicit: return "cot_implicit";
    case StrategyTag::CotExplicit: return "cot_explicit";
    case StrategyTag::InContext: return "in_context";
  }
  throw Error("unreachable strategy tag");
}

StrategyTag strategy_from_string(const std::string& text) {
  if (text == "simple") return StrategyTag::Simple;
  if (text == "self") return StrategyTag::Self;
  if (text == "cot_implicit" || text == "cot-implicit") return StrategyTag::CotImplicit;
  if (text == "cot_explicit" || text == "cot-explicit") return StrategyTag::CotExplicit;
  if (text == "in_context" || text == "incontext") return StrategyTag::InContext;
  throw Error("unknown strategy: " + text);
}

std::string PromptSpec::assembled() const {
  std::string out = prefix;
  out += ' ';
  out += input_control(inputs);
  out += ' ';
  out += answer_directive;
  return out;
}

}  // namespace promptlog
