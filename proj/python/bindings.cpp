// Python bindings for the main pipeline operations: prompt construction,
// response parsing, corpus handling, metrics, the scripted/http gateway and
// prompt selection.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "promptlog/corpus.hpp"
#include "promptlog/gateway.hpp"
#include "promptlog/metrics.hpp"
#include "promptlog/parser.hpp"
#include "promptlog/prompt.hpp"
#include "promptlog/selection.hpp"

namespace py = pybind11;
using namespace promptlog;

namespace {

Task task_arg(const std::string& name) { return task_from_string(name); }

}  // namespace

PYBIND11_MODULE(_promptlog, m) {
  m.doc() = "Prompt-driven log parsing and anomaly detection pipeline";

  py::register_exception<Error>(m, "PipelineError");

  // --- core types -------------------------------------------------------
  py::class_<RawLog>(m, "RawLog")
      .def(py::init<>())
      .def_readwrite("index", &RawLog::index)
      .def_readwrite("content", &RawLog::content)
      .def_readwrite("timestamp", &RawLog::timestamp)
      .def_readwrite("gold_template", &RawLog::gold_template)
      .def_readwrite("gold_anomaly", &RawLog::gold_anomaly)
      .def("__repr__", [](const RawLog& log) {
        return "RawLog(" + std::to_string(log.index) + ", '" + log.content + "')";
      });

  py::class_<Token>(m, "Token")
      .def_property_readonly("text", [](const Token& t) { return t.text; })
      .def_property_readonly("variable", &Token::is_variable);

  py::class_<LogTemplate>(m, "LogTemplate")
      .def_property_readonly("text", [](const LogTemplate& t) { return t.text; })
      .def_property_readonly("tokens", [](const LogTemplate& t) { return t.tokens; })
      .def("__eq__", [](const LogTemplate& a, const LogTemplate& b) { return a == b; })
      .def("__repr__", [](const LogTemplate& t) { return "LogTemplate('" + t.text + "')"; });

  py::class_<LabelledPair>(m, "LabelledPair")
      .def(py::init([](std::string log, std::string label) {
             return LabelledPair{std::move(log), std::move(label)};
           }),
           py::arg("log"), py::arg("label"))
      .def_readwrite("log", &LabelledPair::log)
      .def_readwrite("label", &LabelledPair::label);

  py::class_<PromptSpec>(m, "PromptSpec")
      .def_readonly("prefix", &PromptSpec::prefix)
      .def_readonly("inputs", &PromptSpec::inputs)
      .def_readonly("answer_directive", &PromptSpec::answer_directive)
      .def_readonly("temperature", &PromptSpec::temperature)
      .def_property_readonly("strategy",
                             [](const PromptSpec& spec) { return to_string(spec.strategy); })
      .def("assembled", &PromptSpec::assembled);

  py::class_<ParsedAnswer>(m, "ParsedAnswer")
      .def_readonly("ordinal", &ParsedAnswer::ordinal)
      .def_readonly("answer", &ParsedAnswer::answer)
      .def_readonly("reason", &ParsedAnswer::reason);

  py::class_<ParseDiagnostics>(m, "ParseDiagnostics")
      .def_readonly("missing_ordinals", &ParseDiagnostics::missing_ordinals)
      .def_readonly("duplicate_ordinals", &ParseDiagnostics::duplicate_ordinals)
      .def_readonly("extra_lines", &ParseDiagnostics::extra_lines)
      .def("format_valid", &ParseDiagnostics::format_valid);

  // --- prompt engine ------------------------------------------------------
  m.def("input_control", &input_control, py::arg("logs"));
  m.def("answer_control", &answer_control, py::arg("answer_range"));
  m.def(
      "build_simple_prompt",
      [](const std::string& task, const std::vector<std::string>& logs,
         const std::string& parsing_prefix) {
        return build_simple_prompt(task_arg(task), logs,
                                   parsing_prefix.empty() ? kSimpleParsingPrefix
                                                          : std::string_view(parsing_prefix));
      },
      py::arg("task"), py::arg("logs"), py::arg("parsing_prefix") = "");
  m.def(
      "build_cot_prompt",
      [](const std::vector<std::string>& logs, const std::string& mode) {
        return build_cot_prompt(logs, cot_mode_from_string(mode));
      },
      py::arg("logs"), py::arg("mode") = "explicit");
  m.def(
      "build_incontext_prompt",
      [](const std::vector<std::string>& logs, const std::vector<LabelledPair>& pairs,
         const std::string& task) {
        return build_incontext_prompt(logs, pairs, task_arg(task));
      },
      py::arg("logs"), py::arg("pairs"), py::arg("task"));
  m.def(
      "build_self_prompt",
      [](const std::vector<std::string>& logs, std::string prefix, const std::string& task) {
        return build_self_prompt(logs, std::move(prefix), task_arg(task));
      },
      py::arg("logs"), py::arg("prefix"), py::arg("task") = "parsing");
  m.def("batch_logs", &batch_logs, py::arg("logs"), py::arg("budget"), py::arg("prefix"),
        py::arg("answer_directive"));

  // --- response parsing ---------------------------------------------------
  m.def("parse_numbered_answers", &parse_numbered_answers, py::arg("text"),
        py::arg("expected_n"));
  m.def(
      "normalize_template",
      [](const std::string& text) { return normalize_template(text); }, py::arg("text"));
  m.def(
      "normalize_verdict",
      [](const std::string& text) { return to_string(normalize_verdict(text)); },
      py::arg("text"));
  m.def(
      "validate_coverage",
      [](const std::vector<ParsedAnswer>& answers, std::size_t expected_n,
         const std::string& task) {
        return validate_coverage(answers, expected_n, task_arg(task));
      },
      py::arg("answers"), py::arg("expected_n"), py::arg("task"));

  // --- corpus ---------------------------------------------------------------
  py::class_<Corpus>(m, "Corpus")
      .def_readonly("name", &Corpus::name)
      .def_readonly("logs", &Corpus::logs)
      .def_readonly("has_templates", &Corpus::has_templates)
      .def_readonly("has_anomaly_labels", &Corpus::has_anomaly_labels)
      .def("__len__", &Corpus::size);

  py::class_<Split>(m, "Split")
      .def_readonly("train", &Split::train)
      .def_readonly("test", &Split::test)
      .def_readonly("ratio", &Split::ratio);

  m.def(
      "load_corpus",
      [](const std::filesystem::path& path, const std::string& format, std::string name) {
        return load_corpus(path, CorpusFormat::parse(format), std::move(name));
      },
      py::arg("path"), py::arg("format") = "tsv:content", py::arg("name") = "");
  m.def("chronological_split", &chronological_split, py::arg("corpus"), py::arg("ratio"));
  m.def("split_at", &split_at, py::arg("corpus"), py::arg("k"));
  m.def("head_slice", &head_slice, py::arg("corpus"), py::arg("n"));
  m.def(
      "sample_incontext_pairs",
      [](const Corpus& corpus, std::size_t m_pairs, const std::string& task,
         std::uint64_t seed) {
        return sample_incontext_pairs(corpus, m_pairs, task_arg(task), seed);
      },
      py::arg("corpus"), py::arg("m"), py::arg("task"), py::arg("seed") = 17);

  // --- metrics ---------------------------------------------------------------
  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def_readonly("tp", &ConfusionCounts::tp)
      .def_readonly("tn", &ConfusionCounts::tn)
      .def_readonly("fp", &ConfusionCounts::fp)
      .def_readonly("fn", &ConfusionCounts::fn);

  py::class_<EvalReport>(m, "EvalReport")
      .def_property_readonly("task", [](const EvalReport& r) { return to_string(r.task); })
      .def_property_readonly("level", [](const EvalReport& r) { return to_string(r.level); })
      .def_readonly("precision", &EvalReport::precision)
      .def_readonly("recall", &EvalReport::recall)
      .def_readonly("f1", &EvalReport::f1)
      .def_readonly("rand_index", &EvalReport::rand_index)
      .def_readonly("n_items", &EvalReport::n_items);

  py::class_<TemplateObservation>(m, "TemplateObservation")
      .def(py::init([](std::string text, bool predicted_abnormal,
                       std::optional<bool> gold_abnormal, std::string reason) {
             TemplateObservation observation;
             observation.template_text = std::move(text);
             observation.predicted.label =
                 predicted_abnormal ? Verdict::Abnormal : Verdict::Normal;
             observation.predicted.reason = std::move(reason);
             observation.gold_abnormal = gold_abnormal;
             return observation;
           }),
           py::arg("template_text"), py::arg("predicted_abnormal"),
           py::arg("gold_abnormal") = std::nullopt, py::arg("reason") = "")
      .def_readonly("template_text", &TemplateObservation::template_text)
      .def_property_readonly(
          "predicted_abnormal",
          [](const TemplateObservation& o) { return o.predicted.abnormal(); })
      .def_readonly("gold_abnormal", &TemplateObservation::gold_abnormal);

  py::class_<Session>(m, "Session")
      .def_readonly("start", &Session::start)
      .def_readonly("templates", &Session::templates)
      .def_readonly("predicted_abnormal", &Session::predicted_abnormal)
      .def_readonly("gold_abnormal", &Session::gold_abnormal)
      .def("__len__", &Session::size);

  m.def("parsing_token_confusion", &parsing_token_confusion, py::arg("pred"), py::arg("gold"));
  m.def(
      "parsing_f1",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        std::vector<std::pair<LogTemplate, LogTemplate>> templates;
        templates.reserve(pairs.size());
        for (const auto& [pred, gold] : pairs) {
          templates.emplace_back(normalize_template(pred), normalize_template(gold));
        }
        return parsing_f1(templates);
      },
      py::arg("pairs"), "Micro token F1 over (predicted, gold) template text pairs.");
  m.def("rand_index",
        py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&>(
            &rand_index),
        py::arg("pred_assignment"), py::arg("gold_assignment"));
  m.def("group_sessions", &group_sessions, py::arg("stream"), py::arg("window") = 100);
  m.def(
      "anomaly_f1",
      [](const std::vector<bool>& pred, const std::vector<bool>& gold, const std::string& level) {
        return anomaly_f1(pred, gold,
                          level == "session" ? ReportLevel::Session : ReportLevel::Template);
      },
      py::arg("pred_labels"), py::arg("gold_labels"), py::arg("level") = "template");
  m.def("prompt_score", &prompt_score, py::arg("report"));
  m.def(
      "rating_summary",
      [](const std::vector<int>& scores, int threshold, const std::string& mode) {
        const RatingSummary summary = rating_summary(
            scores, threshold, mode == "strict" ? HipMode::Strict : HipMode::AtLeast);
        return py::make_tuple(summary.mean, summary.hip);
      },
      py::arg("scores"), py::arg("threshold") = 4, py::arg("mode") = "at-least",
      "Returns (mean, hip).");

  // --- gateway ---------------------------------------------------------------
  py::class_<BackendConfig>(m, "BackendConfig")
      .def(py::init<>())
      .def_readwrite("endpoint", &BackendConfig::endpoint)
      .def_readwrite("model_name", &BackendConfig::model_name)
      .def_readwrite("auth_env", &BackendConfig::auth_env)
      .def_readwrite("timeout_seconds", &BackendConfig::timeout_seconds)
      .def_readwrite("max_retries", &BackendConfig::max_retries)
      .def_readwrite("initial_temperature", &BackendConfig::initial_temperature)
      .def_readwrite("temperature_step", &BackendConfig::temperature_step)
      .def_readwrite("temperature_cap", &BackendConfig::temperature_cap)
      .def_readwrite("workers", &BackendConfig::workers)
      .def_property(
          "kind",
          [](const BackendConfig& c) {
            return c.kind == BackendKind::Scripted ? "scripted" : "http";
          },
          [](BackendConfig& c, const std::string& kind) {
            c.kind = kind == "scripted" ? BackendKind::Scripted : BackendKind::HttpChat;
          })
      .def_property(
          "retry_mode",
          [](const BackendConfig& c) { return c.retry_mode == RetryMode::Add ? "add" : "set"; },
          [](BackendConfig& c, const std::string& mode) {
            c.retry_mode = retry_mode_from_string(mode);
          });

  py::class_<Attempt>(m, "Attempt")
      .def_readonly("temperature", &Attempt::temperature)
      .def_readonly("response", &Attempt::response)
      .def_readonly("format_valid", &Attempt::format_valid);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("prompt", &RunRecord::prompt)
      .def_readonly("attempts", &RunRecord::attempts)
      .def_readonly("final_response", &RunRecord::final_response)
      .def_readonly("wall_time_seconds", &RunRecord::wall_time_seconds)
      .def("succeeded", &RunRecord::succeeded);

  py::class_<QueryResult>(m, "QueryResult")
      .def_readonly("answers", &QueryResult::answers)
      .def_readonly("record", &QueryResult::record)
      .def("ok", &QueryResult::ok);

  py::class_<Backend>(m, "Backend");
  py::class_<ScriptedBackend, Backend>(m, "ScriptedBackend")
      .def(py::init<>())
      .def_static("from_file", &ScriptedBackend::from_file, py::arg("path"))
      .def("script", &ScriptedBackend::script, py::arg("prompt_text"), py::arg("responses"))
      .def("script_digest", &ScriptedBackend::script_digest, py::arg("digest"),
           py::arg("responses"))
      .def("script_fallback", &ScriptedBackend::script_fallback, py::arg("responses"))
      .def("complete", &ScriptedBackend::complete, py::arg("prompt_text"),
           py::arg("temperature") = 0.5);
  py::class_<HttpChatBackend, Backend>(m, "HttpChatBackend")
      .def(py::init<BackendConfig>(), py::arg("config"))
      .def("complete", &HttpChatBackend::complete, py::arg("prompt_text"),
           py::arg("temperature") = 0.5);

  m.def("prompt_digest", &prompt_digest, py::arg("prompt_text"));
  m.def(
      "query_with_retry",
      [](Backend& backend, const BackendConfig& config, const PromptSpec& prompt,
         std::size_t expected_n, const std::string& task) {
        return query_with_retry(backend, config, prompt, expected_n,
                                make_coverage_validator(expected_n, task_arg(task)));
      },
      py::arg("backend"), py::arg("config"), py::arg("prompt"), py::arg("expected_n"),
      py::arg("task"));
  m.def("format_failure_rate", &format_failure_rate, py::arg("records"));

  // --- selection ---------------------------------------------------------------
  py::class_<Candidate>(m, "Candidate")
      .def_readonly("id", &Candidate::id)
      .def_readonly("prefix", &Candidate::prefix);

  py::class_<CandidatePool>(m, "CandidatePool")
      .def_readonly("candidates", &CandidatePool::candidates);

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("scores", &SelectionResult::scores)
      .def_readonly("winner", &SelectionResult::winner)
      .def_readonly("calibration_size", &SelectionResult::calibration_size)
      .def_readonly("failed_candidates", &SelectionResult::failed_candidates);

  m.def("load_pool", &load_pool, py::arg("path"));
  m.def("elicit_candidates", &elicit_candidates, py::arg("backend"), py::arg("config"),
        py::arg("k"), py::arg("task_description"), py::arg("meta_prompt_template"));
  m.def("select_prompt", &select_prompt, py::arg("pool"), py::arg("calibration"),
        py::arg("backend"), py::arg("config"), py::arg("budget") = 4000);

  // Pinned prompt texts.
  m.attr("SIMPLE_ANOMALY_PREFIX") = std::string(kSimpleAnomalyPrefix);
  m.attr("COT_EXPLICIT_PREFIX") = std::string(kCotExplicitPrefix);
  m.attr("ANSWER_RANGE_ANOMALY") = std::string(kAnswerRangeAnomaly);
  m.attr("ANSWER_RANGE_PARSING") = std::string(kAnswerRangeParsing);
  m.attr("ANSWER_RANGE_BINARY") = std::string(kAnswerRangeBinary);
  m.attr("WILDCARD") = std::string(kWildcard);
}
