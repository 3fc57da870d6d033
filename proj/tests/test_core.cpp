#include <doctest.h>

#include "promptlog/core.hpp"
#include "promptlog/json_io.hpp"
#include "promptlog/parser.hpp"
#include "promptlog/prompt.hpp"

#include "rng.hpp"

using namespace promptlog;

TEST_CASE("log template text and tokens are a bijection") {
  const LogTemplate t = normalize_template("send <*> bytes to <*>");
  std::string joined;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (i > 0) joined += ' ';
    joined += t.tokens[i].is_variable() ? kWildcard : t.tokens[i].text;
  }
  CHECK(joined == t.text);
}

TEST_CASE("prompt assembly is deterministic and ordered prefix/input/answer") {
  PromptSpec spec;
  spec.prefix = "P";
  spec.inputs = {"a", "b"};
  spec.answer_directive = "D";
  CHECK(spec.assembled() == "P There are 2 logs, the logs begin: (1)a\n (2)b D");
  CHECK(spec.assembled() == spec.assembled());
}

TEST_CASE("strategy tags round-trip through names") {
  for (StrategyTag tag : {StrategyTag::Simple, StrategyTag::Self, StrategyTag::CotImplicit,
                          StrategyTag::CotExplicit, StrategyTag::InContext}) {
    CHECK(strategy_from_string(to_string(tag)) == tag);
  }
  CHECK_THROWS_AS(strategy_from_string("zigzag"), Error);
}

namespace {

RawLog random_log(promptlog::detail::Rng& rng, std::size_t index) {
  RawLog log;
  log.index = index;
  log.content = "event " + std::to_string(rng.below(1000));
  if (rng.below(2) == 0) log.timestamp = std::to_string(1000 + index);
  if (rng.below(2) == 0) log.gold_template = "event <*>";
  if (rng.below(2) == 0) log.gold_anomaly = rng.below(2) == 0;
  return log;
}

}  // namespace

TEST_CASE("core types survive a json round trip") {
  promptlog::detail::Rng rng(7);

  for (int i = 0; i < 50; ++i) {
    const RawLog log = random_log(rng, static_cast<std::size_t>(i));
    CHECK(json(log).get<RawLog>() == log);
  }

  const LogTemplate tpl = normalize_template("Connection id=<*> from 〈*〉 closed");
  CHECK(json(tpl).get<LogTemplate>() == tpl);

  const AnomalyVerdict verdict{Verdict::Abnormal, "kernel error keyword"};
  CHECK(json(verdict).get<AnomalyVerdict>() == verdict);

  PromptSpec prompt;
  prompt.prefix = "Classify";
  prompt.inputs = {"a", "b"};
  prompt.answer_directive = answer_control(kAnswerRangeAnomaly);
  prompt.temperature = 0.5;
  prompt.strategy = StrategyTag::CotExplicit;
  CHECK(json(prompt).get<PromptSpec>() == prompt);

  const ParsedAnswer answer{2, "normal", "routine shutdown"};
  CHECK(json(answer).get<ParsedAnswer>() == answer);

  Session session;
  session.start = 100;
  session.templates = {"a <*>", "b"};
  session.verdicts = {{Verdict::Normal, ""}, {Verdict::Abnormal, "alert"}};
  session.predicted_abnormal = true;
  session.gold_abnormal = false;
  CHECK(json(session).get<Session>() == session);

  EvalReport report;
  report.task = Task::Parsing;
  report.level = ReportLevel::Token;
  report.precision = 0.75;
  report.recall = std::nullopt;
  report.f1 = std::nullopt;
  report.rand_index = 0.5;
  report.n_items = 12;
  CHECK(json(report).get<EvalReport>() == report);
}
