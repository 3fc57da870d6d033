// JSON (de)serialization for the persisted types: prediction records, run
// records and reports round-trip losslessly through this layer.

#pragma once

#include <nlohmann/json.hpp>

#include "promptlog/core.hpp"
#include "promptlog/gateway.hpp"
#include "promptlog/metrics.hpp"
#include "promptlog/selection.hpp"

namespace promptlog {

using nlohmann::json;

void to_json(json& j, const RawLog& value);
void from_json(const json& j, RawLog& value);

void to_json(json& j, const Token& value);
void from_json(const json& j, Token& value);

void to_json(json& j, const LogTemplate& value);
void from_json(const json& j, LogTemplate& value);

void to_json(json& j, const AnomalyVerdict& value);
void from_json(const json& j, AnomalyVerdict& value);

void to_json(json& j, const Session& value);
void from_json(const json& j, Session& value);

void to_json(json& j, const PromptSpec& value);
void from_json(const json& j, PromptSpec& value);

void to_json(json& j, const ParsedAnswer& value);
void from_json(const json& j, ParsedAnswer& value);

void to_json(json& j, const Attempt& value);
void from_json(const json& j, Attempt& value);

void to_json(json& j, const RunRecord& value);
void from_json(const json& j, RunRecord& value);

void to_json(json& j, const EvalReport& value);
void from_json(const json& j, EvalReport& value);

void to_json(json& j, const SelectionResult& value);
void from_json(const json& j, SelectionResult& value);

}  // namespace promptlog
