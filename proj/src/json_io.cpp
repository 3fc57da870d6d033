#include "promptlog/json_io.hpp"

namespace promptlog {
namespace {

template <typename T>
void write_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) {
    j[key] = *value;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& value) {
  if (j.contains(key) && !j.at(key).is_null()) {
    value = j.at(key).get<T>();
  } else {
    value.reset();
  }
}

}  // namespace

void to_json(json& j, const RawLog& value) {
  j = json{{"index", value.index}, {"content", value.content}};
  write_optional(j, "timestamp", value.timestamp);
  write_optional(j, "gold_template", value.gold_template);
  write_optional(j, "gold_anomaly", value.gold_anomaly);
}

void from_json(const json& j, RawLog& value) {
  value.index = j.at("index").get<std::size_t>();
  value.content = j.at("content").get<std::string>();
  read_optional(j, "timestamp", value.timestamp);
  read_optional(j, "gold_template", value.gold_template);
  read_optional(j, "gold_anomaly", value.gold_anomaly);
}

void to_json(json& j, const Token& value) {
  j = json{{"text", value.text}, {"variable", value.is_variable()}};
}

void from_json(const json& j, Token& value) {
  value.text = j.at("text").get<std::string>();
  value.kind = j.at("variable").get<bool>() ? TokenKind::Variable : TokenKind::Static;
}

void to_json(json& j, const LogTemplate& value) {
  j = json{{"text", value.text}, {"tokens", value.tokens}};
}

void from_json(const json& j, LogTemplate& value) {
  value.text = j.at("text").get<std::string>();
  value.tokens = j.at("tokens").get<std::vector<Token>>();
}

void to_json(json& j, const AnomalyVerdict& value) {
  j = json{{"label", to_string(value.label)}, {"reason", value.reason}};
}

void from_json(const json& j, AnomalyVerdict& value) {
  const auto label = j.at("label").get<std::string>();
  if (label == "abnormal") {
    value.label = Verdict::Abnormal;
  } else if (label == "normal") {
    value.label = Verdict::Normal;
  } else {
    throw Error("unknown verdict label in record: " + label);
  }
  value.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const Session& value) {
  j = json{{"start", value.start},
           {"templates", value.templates},
           {"verdicts", value.verdicts},
           {"predicted_abnormal", value.predicted_abnormal}};
  write_optional(j, "gold_abnormal", value.gold_abnormal);
}

void from_json(const json& j, Session& value) {
  value.start = j.at("start").get<std::size_t>();
  value.templates = j.at("templates").get<std::vector<std::string>>();
  value.verdicts = j.at("verdicts").get<std::vector<AnomalyVerdict>>();
  value.predicted_abnormal = j.at("predicted_abnormal").get<bool>();
  read_optional(j, "gold_abnormal", value.gold_abnormal);
}

void to_json(json& j, const PromptSpec& value) {
  j = json{{"prefix", value.prefix},
           {"inputs", value.inputs},
           {"answer_directive", value.answer_directive},
           {"temperature", value.temperature},
           {"strategy", to_string(value.strategy)}};
}

void from_json(const json& j, PromptSpec& value) {
  value.prefix = j.at("prefix").get<std::string>();
  value.inputs = j.at("inputs").get<std::vector<std::string>>();
  value.answer_directive = j.at("answer_directive").get<std::string>();
  value.temperature = j.at("temperature").get<double>();
  value.strategy = strategy_from_string(j.at("strategy").get<std::string>());
}

void to_json(json& j, const ParsedAnswer& value) {
  j = json{{"ordinal", value.ordinal}, {"answer", value.answer}, {"reason", value.reason}};
}

void from_json(const json& j, ParsedAnswer& value) {
  value.ordinal = j.at("ordinal").get<std::size_t>();
  value.answer = j.at("answer").get<std::string>();
  value.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const Attempt& value) {
  j = json{{"temperature", value.temperature},
           {"response", value.response},
           {"format_valid", value.format_valid}};
}

void from_json(const json& j, Attempt& value) {
  value.temperature = j.at("temperature").get<double>();
  value.response = j.at("response").get<std::string>();
  value.format_valid = j.at("format_valid").get<bool>();
}

void to_json(json& j, const RunRecord& value) {
  j = json{{"prompt", value.prompt},
           {"attempts", value.attempts},
           {"wall_time_seconds", value.wall_time_seconds}};
  write_optional(j, "final", value.final_response);
}

void from_json(const json& j, RunRecord& value) {
  value.prompt = j.at("prompt").get<PromptSpec>();
  value.attempts = j.at("attempts").get<std::vector<Attempt>>();
  value.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  read_optional(j, "final", value.final_response);
}

void to_json(json& j, const EvalReport& value) {
  j = json{{"task", to_string(value.task)},
           {"level", to_string(value.level)},
           {"n_items", value.n_items}};
  write_optional(j, "precision", value.precision);
  write_optional(j, "recall", value.recall);
  write_optional(j, "f1", value.f1);
  if (value.rand_index) j["rand_index"] = *value.rand_index;
}

void from_json(const json& j, EvalReport& value) {
  value.task = task_from_string(j.at("task").get<std::string>());
  const auto level = j.at("level").get<std::string>();
  if (level == "token") {
    value.level = ReportLevel::Token;
  } else if (level == "session") {
    value.level = ReportLevel::Session;
  } else if (level == "template") {
    value.level = ReportLevel::Template;
  } else {
    throw Error("unknown report level: " + level);
  }
  value.n_items = j.at("n_items").get<std::size_t>();
  read_optional(j, "precision", value.precision);
  read_optional(j, "recall", value.recall);
  read_optional(j, "f1", value.f1);
  read_optional(j, "rand_index", value.rand_index);
}

void to_json(json& j, const SelectionResult& value) {
  j = json{{"scores", value.scores},
           {"winner", value.winner},
           {"calibration_size", value.calibration_size},
           {"failed_candidates", value.failed_candidates}};
}

void from_json(const json& j, SelectionResult& value) {
  value.scores = j.at("scores").get<std::map<std::string, double>>();
  value.winner = j.at("winner").get<std::string>();
  value.calibration_size = j.at("calibration_size").get<std::size_t>();
  value.failed_candidates = j.at("failed_candidates").get<std::vector<std::string>>();
}

}  // namespace promptlog
