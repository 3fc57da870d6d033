#include "promptlog/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "promptlog/json_io.hpp"
#include "promptlog/parser.hpp"
#include "promptlog/prompt.hpp"

#include "delimited.hpp"
#include "rng.hpp"

namespace promptlog {
namespace {

std::string fmt_double(double value) {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed << value;
  return out.str();
}

std::string fmt_component(const std::optional<double>& value) {
  return value ? fmt_double(*value) : std::string("undefined");
}

std::string describe(const EvalReport& report) {
  std::string out = to_string(report.level) + "-level: precision=" +
                    fmt_component(report.precision) + " recall=" + fmt_component(report.recall) +
                    " f1=" + fmt_component(report.f1);
  if (report.rand_index) out += " rand_index=" + fmt_double(*report.rand_index);
  out += " n=" + std::to_string(report.n_items);
  return out;
}

std::string to_descriptor(const CorpusFormat& format) {
  std::string out = format.delimiter == ',' ? "csv:" : "tsv:";
  if (format.header) return out + "header";
  for (std::size_t i = 0; i < format.columns.size(); ++i) {
    if (i > 0) out += ',';
    switch (format.columns[i]) {
      case ColumnKind::Content: out += "content"; break;
      case ColumnKind::Template: out += "template"; break;
      case ColumnKind::Anomaly: out += "anomaly"; break;
      case ColumnKind::Timestamp: out += "timestamp"; break;
    }
  }
  return out;
}

std::string cli_strategy_name(StrategyTag tag) {
  switch (tag) {
    case StrategyTag::Simple: return "simple";
    case StrategyTag::Self: return "self";
    case StrategyTag::CotImplicit: return "cot-implicit";
    case StrategyTag::CotExplicit: return "cot-explicit";
    case StrategyTag::InContext: return "incontext";
  }
  return "simple";
}

void write_config_snapshot(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config snapshot: " + path.string());
  out << "task=" << (config.task == Task::Parsing ? "parse" : "detect") << '\n';
  out << "corpus=" << config.corpus_path.string() << '\n';
  out << "format=" << to_descriptor(config.format) << '\n';
  if (!config.corpus_name.empty()) out << "name=" << config.corpus_name << '\n';
  if (config.split_ratio) out << "split-ratio=" << fmt_double(*config.split_ratio) << '\n';
  if (config.split_count) out << "split-at=" << *config.split_count << '\n';
  out << "strategy=" << cli_strategy_name(config.strategy) << '\n';
  if (config.strategy == StrategyTag::CotImplicit || config.strategy == StrategyTag::CotExplicit) {
    out << "cot-mode=" << (config.cot_mode == CotMode::Implicit ? "implicit" : "explicit")
        << '\n';
  }
  if (config.incontext_m > 0) out << "m=" << config.incontext_m << '\n';
  out << "seed=" << config.seed << '\n';
  if (!config.prefix_file.empty()) out << "prefix-file=" << config.prefix_file.string() << '\n';
  if (!config.pool_file.empty()) out << "pool=" << config.pool_file.string() << '\n';
  if (!config.templates_file.empty()) {
    out << "templates=" << config.templates_file.string() << '\n';
  }
  out << "budget=" << config.budget << '\n';
  if (config.task == Task::Anomaly) out << "window=" << config.window << '\n';
  if (config.failure_budget) out << "failure-budget=" << *config.failure_budget << '\n';
  out << "backend=" << (config.backend.kind == BackendKind::Scripted ? "scripted" : "http")
      << '\n';
  if (!config.backend.endpoint.empty()) out << "endpoint=" << config.backend.endpoint << '\n';
  if (!config.backend.model_name.empty()) out << "model=" << config.backend.model_name << '\n';
  if (!config.backend.fixtures_path.empty()) {
    out << "fixtures=" << config.backend.fixtures_path.string() << '\n';
  }
  out << "temperature=" << fmt_double(config.backend.initial_temperature) << '\n';
  out << "retry-step=" << fmt_double(config.backend.temperature_step) << '\n';
  out << "retry-mode=" << (config.backend.retry_mode == RetryMode::Add ? "add" : "set") << '\n';
  out << "max-retries=" << config.backend.max_retries << '\n';
  out << "workers=" << config.backend.workers << '\n';
}

std::filesystem::path prepare_run_dir(const RunConfig& config) {
  if (config.out_dir.empty()) throw Error("no output directory configured");
  std::filesystem::create_directories(config.out_dir);
  write_config_snapshot(config, config.out_dir / "config.snapshot");
  return config.out_dir;
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
  }

  void write(const json& object) { out_ << object.dump() << '\n'; }

 private:
  std::ofstream out_;
};

std::string read_prefix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prefix file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
    text.pop_back();
  }
  if (text.empty()) throw Error("prefix file is empty: " + path.string());
  return text;
}

Split make_split(const Corpus& corpus, const RunConfig& config) {
  if (config.split_ratio && config.split_count) {
    throw Error("give either a split ratio or a split count, not both");
  }
  if (config.split_ratio) return chronological_split(corpus, *config.split_ratio);
  if (config.split_count) return split_at(corpus, *config.split_count);
  return chronological_split(corpus, 0.0);
}

Corpus subcorpus(const Corpus& corpus, std::vector<RawLog> logs) {
  Corpus out;
  out.name = corpus.name;
  out.has_templates = !logs.empty() && std::all_of(logs.begin(), logs.end(), [](const RawLog& l) {
    return l.gold_template.has_value();
  });
  out.has_anomaly_labels =
      !logs.empty() && std::all_of(logs.begin(), logs.end(), [](const RawLog& l) {
        return l.gold_anomaly.has_value();
      });
  out.logs = std::move(logs);
  return out;
}

struct Strategy {
  std::string prefix;
  std::string directive;
  std::function<PromptSpec(const std::vector<std::string>&)> build;
};

Strategy resolve_strategy(const RunConfig& config, const Corpus& corpus, const Split& split) {
  Strategy strategy;
  const Task task = config.task;
  switch (config.strategy) {
    case StrategyTag::Simple: {
      std::string prefix;
      if (task == Task::Parsing) {
        prefix = config.prefix_file.empty() ? std::string(kSimpleParsingPrefix)
                                            : read_prefix_file(config.prefix_file);
      } else {
        prefix = std::string(kSimpleAnomalyPrefix);
      }
      strategy.prefix = prefix;
      strategy.directive = answer_control(answer_range_for(task));
      strategy.build = [task, prefix](const std::vector<std::string>& logs) {
        return build_simple_prompt(task, logs, prefix);
      };
      break;
    }
    case StrategyTag::Self: {
      if (config.prefix_file.empty()) {
        throw Error("the self strategy needs --prefix-file (run the select command first)");
      }
      const std::string prefix = read_prefix_file(config.prefix_file);
      strategy.prefix = prefix;
      strategy.directive = answer_control(answer_range_for(task));
      strategy.build = [task, prefix](const std::vector<std::string>& logs) {
        return build_self_prompt(logs, prefix, task);
      };
      break;
    }
    case StrategyTag::CotImplicit:
    case StrategyTag::CotExplicit: {
      if (task != Task::Anomaly) {
        throw Error("cot strategies are registered for the anomaly task only; use --strategy "
                    "self with a custom prefix to cross-apply");
      }
      const CotMode mode =
          config.strategy == StrategyTag::CotImplicit ? CotMode::Implicit : CotMode::Explicit;
      PromptSpec probe = build_cot_prompt({"x"}, mode);
      strategy.prefix = probe.prefix;
      strategy.directive = probe.answer_directive;
      strategy.build = [mode](const std::vector<std::string>& logs) {
        return build_cot_prompt(logs, mode);
      };
      break;
    }
    case StrategyTag::InContext: {
      const std::size_t m =
          config.incontext_m > 0 ? config.incontext_m : (task == Task::Anomaly ? 20 : 3);
      Corpus train = subcorpus(corpus, split.train);
      if (train.logs.empty()) {
        throw Error("the in-context strategy samples labelled examples from the train slice; "
                    "give --split-ratio or --split-at");
      }
      const auto pairs = sample_incontext_pairs(train, m, task, config.seed);
      PromptSpec probe = build_incontext_prompt({"x"}, pairs, task);
      strategy.prefix = probe.prefix;
      strategy.directive = probe.answer_directive;
      strategy.build = [pairs, task](const std::vector<std::string>& logs) {
        return build_incontext_prompt(logs, pairs, task);
      };
      break;
    }
  }
  return strategy;
}

struct BatchRun {
  std::vector<std::vector<std::string>> batches;
  std::vector<QueryResult> outcomes;
  std::size_t failed = 0;
};

BatchRun run_batches(const RunConfig& config, Backend& backend, const Strategy& strategy,
                     const std::vector<std::string>& inputs, Task task) {
  BatchRun run;
  if (inputs.empty()) return run;
  run.batches = batch_logs(inputs, config.budget, strategy.prefix, strategy.directive);

  std::vector<PromptSpec> prompts;
  std::vector<std::size_t> expected;
  prompts.reserve(run.batches.size());
  for (const auto& batch : run.batches) {
    PromptSpec spec = strategy.build(batch);
    spec.temperature = config.backend.initial_temperature;
    prompts.push_back(std::move(spec));
    expected.push_back(batch.size());
  }
  run.outcomes = run_queries(backend, config.backend, prompts, expected, [&](std::size_t i) {
    return make_coverage_validator(expected[i], task);
  });
  for (const QueryResult& outcome : run.outcomes) {
    if (!outcome.ok()) ++run.failed;
  }
  return run;
}

void write_run_records(const std::filesystem::path& dir, const BatchRun& run) {
  JsonlWriter records(dir / "run_records.jsonl");
  for (std::size_t b = 0; b < run.outcomes.size(); ++b) {
    json object = run.outcomes[b].record;
    object["batch_index"] = b;
    records.write(object);
  }
}

int finish_run(const RunConfig& config, RunOutcome& outcome, const BatchRun& run,
               std::ostream& summary) {
  outcome.failed_batches = run.failed;
  if (!run.outcomes.empty()) {
    std::vector<RunRecord> records;
    records.reserve(run.outcomes.size());
    for (const QueryResult& result : run.outcomes) records.push_back(result.record);
    summary << "first-attempt format failure rate: " << fmt_double(format_failure_rate(records))
            << '\n';
  }
  if (config.failure_budget && run.failed > *config.failure_budget) {
    summary << "failure budget exceeded: " << run.failed << " failed batches > "
            << *config.failure_budget << '\n';
    return kExitFatal;
  }
  return run.failed > 0 ? kExitPartial : kExitSuccess;
}

// --------------------------------------------------------------------------
// Detection stream handling.

struct StreamItem {
  std::string text;
  std::optional<bool> gold_abnormal;
};

std::vector<StreamItem> build_stream(const std::vector<RawLog>& logs, bool use_gold_templates,
                                     const std::unordered_map<std::size_t, std::string>*
                                         assignments) {
  std::vector<StreamItem> stream;
  stream.reserve(logs.size());
  for (const RawLog& log : logs) {
    StreamItem item;
    if (assignments != nullptr) {
      auto it = assignments->find(log.index);
      if (it == assignments->end()) {
        throw Error("log index " + std::to_string(log.index) +
                    " has no entry in the template-assignment file");
      }
      item.text = it->second;
    } else if (use_gold_templates && log.gold_template) {
      item.text = *log.gold_template;
    } else {
      item.text = log.content;
    }
    item.gold_abnormal = log.gold_anomaly;
    stream.push_back(std::move(item));
  }
  return stream;
}

/// Collapses duplicate template texts to their first occurrence; a
/// deduplicated template is gold-abnormal iff any occurrence is.
std::vector<StreamItem> deduplicate_stream(const std::vector<StreamItem>& stream) {
  std::vector<StreamItem> unique;
  std::unordered_map<std::string, std::size_t> position;
  for (const StreamItem& item : stream) {
    auto it = position.find(item.text);
    if (it == position.end()) {
      position.emplace(item.text, unique.size());
      unique.push_back(item);
      continue;
    }
    StreamItem& existing = unique[it->second];
    if (item.gold_abnormal && *item.gold_abnormal) existing.gold_abnormal = true;
  }
  return unique;
}

}  // namespace

RunOutcome cmd_parse(const RunConfig& config) {
  RunOutcome outcome;
  outcome.run_dir = prepare_run_dir(config);

  const Corpus corpus = load_corpus(config.corpus_path, config.format, config.corpus_name);
  const Split split = make_split(corpus, config);
  const Strategy strategy = resolve_strategy(config, corpus, split);
  const auto backend = make_backend(config.backend);

  std::vector<std::string> contents;
  contents.reserve(split.test.size());
  for (const RawLog& log : split.test) contents.push_back(log.content);

  BatchRun run = run_batches(config, *backend, strategy, contents, Task::Parsing);
  write_run_records(outcome.run_dir, run);
  JsonlWriter predictions(outcome.run_dir / "predictions.jsonl");
  JsonlWriter failed(outcome.run_dir / "failed_batches.jsonl");

  std::vector<std::pair<LogTemplate, LogTemplate>> eval_pairs;
  std::vector<std::string> pred_assignment;
  std::vector<std::string> gold_assignment;

  std::size_t cursor = 0;
  for (std::size_t b = 0; b < run.batches.size(); ++b) {
    const std::size_t batch_size = run.batches[b].size();
    if (!run.outcomes[b].ok()) {
      json entry;
      entry["batch_index"] = b;
      std::vector<std::size_t> indices;
      for (std::size_t i = 0; i < batch_size; ++i) indices.push_back(split.test[cursor + i].index);
      entry["indices"] = indices;
      failed.write(entry);
      cursor += batch_size;
      continue;
    }
    for (const ParsedAnswer& answer : run.outcomes[b].answers) {
      const RawLog& log = split.test[cursor + answer.ordinal - 1];
      const LogTemplate predicted = normalize_template(answer.answer);
      json record;
      record["index"] = log.index;
      record["content"] = log.content;
      record["template"] = predicted.text;
      record["reason"] = answer.reason;
      if (log.gold_template) {
        const LogTemplate gold = normalize_template(*log.gold_template);
        record["gold_template"] = gold.text;
        pred_assignment.push_back(predicted.text);
        gold_assignment.push_back(gold.text);
        eval_pairs.emplace_back(predicted, gold);
      }
      predictions.write(record);
      ++outcome.predicted;
    }
    cursor += batch_size;
  }

  std::ofstream summary(outcome.run_dir / "summary.txt");
  summary << "task: parse\nstrategy: " << cli_strategy_name(config.strategy) << '\n';
  summary << "corpus: " << corpus.name << " (" << corpus.size() << " logs, test "
          << split.test.size() << ")\n";
  summary << "predicted: " << outcome.predicted << "  failed batches: " << run.failed << '\n';

  if (!eval_pairs.empty()) {
    EvalReport report = parsing_f1(eval_pairs);
    if (pred_assignment.size() >= 2) {
      report.rand_index = rand_index(pred_assignment, gold_assignment);
    }
    outcome.reports.push_back(report);
    summary << describe(report) << '\n';
    std::ofstream report_out(outcome.run_dir / "report.json");
    report_out << json(outcome.reports).dump(2) << '\n';
  }

  outcome.exit_code = finish_run(config, outcome, run, summary);
  return outcome;
}

RunOutcome cmd_detect(const RunConfig& config) {
  RunOutcome outcome;
  outcome.run_dir = prepare_run_dir(config);

  const Corpus corpus = load_corpus(config.corpus_path, config.format, config.corpus_name);
  const Split split = make_split(corpus, config);

  std::unordered_map<std::size_t, std::string> assignments;
  const bool use_assignments = !config.templates_file.empty();
  if (use_assignments) {
    for (auto& [index, text] : load_template_assignments(config.templates_file)) {
      assignments[index] = std::move(text);
    }
  }

  const auto test_stream = deduplicate_stream(
      build_stream(split.test, corpus.has_templates, use_assignments ? &assignments : nullptr));
  const bool has_gold = !test_stream.empty() &&
                        std::all_of(test_stream.begin(), test_stream.end(),
                                    [](const StreamItem& item) {
                                      return item.gold_abnormal.has_value();
                                    });

  // In-context demonstrations come from the train-side stream so that the
  // examples are templates like the inputs.
  Strategy strategy;
  if (config.strategy == StrategyTag::InContext) {
    const auto train_stream = build_stream(
        split.train, corpus.has_templates, use_assignments ? &assignments : nullptr);
    Corpus train_templates;
    train_templates.name = corpus.name;
    for (const StreamItem& item : train_stream) {
      RawLog log;
      log.index = train_templates.logs.size();
      log.content = item.text;
      log.gold_anomaly = item.gold_abnormal;
      train_templates.logs.push_back(std::move(log));
    }
    train_templates.has_anomaly_labels =
        !train_templates.logs.empty() &&
        std::all_of(train_templates.logs.begin(), train_templates.logs.end(),
                    [](const RawLog& l) { return l.gold_anomaly.has_value(); });
    const std::size_t m = config.incontext_m > 0 ? config.incontext_m : 20;
    if (train_templates.logs.empty()) {
      throw Error("the in-context strategy samples labelled examples from the train slice; "
                  "give --split-ratio or --split-at");
    }
    const auto pairs = sample_incontext_pairs(train_templates, m, Task::Anomaly, config.seed);
    PromptSpec probe = build_incontext_prompt({"x"}, pairs, Task::Anomaly);
    strategy.prefix = probe.prefix;
    strategy.directive = probe.answer_directive;
    strategy.build = [pairs](const std::vector<std::string>& logs) {
      return build_incontext_prompt(logs, pairs, Task::Anomaly);
    };
  } else {
    strategy = resolve_strategy(config, corpus, split);
  }

  const auto backend = make_backend(config.backend);
  std::vector<std::string> inputs;
  inputs.reserve(test_stream.size());
  for (const StreamItem& item : test_stream) inputs.push_back(item.text);

  BatchRun run = run_batches(config, *backend, strategy, inputs, Task::Anomaly);
  write_run_records(outcome.run_dir, run);
  JsonlWriter predictions(outcome.run_dir / "predictions.jsonl");
  JsonlWriter failed(outcome.run_dir / "failed_batches.jsonl");

  std::vector<TemplateObservation> observations;
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < run.batches.size(); ++b) {
    const std::size_t batch_size = run.batches[b].size();
    if (!run.outcomes[b].ok()) {
      json entry;
      entry["batch_index"] = b;
      std::vector<std::size_t> indices;
      for (std::size_t i = 0; i < batch_size; ++i) indices.push_back(cursor + i);
      entry["indices"] = indices;
      failed.write(entry);
      cursor += batch_size;
      continue;
    }
    for (const ParsedAnswer& answer : run.outcomes[b].answers) {
      const StreamItem& item = test_stream[cursor + answer.ordinal - 1];
      TemplateObservation observation;
      observation.template_text = item.text;
      observation.predicted.label = normalize_verdict(answer.answer);
      observation.predicted.reason = answer.reason;
      observation.gold_abnormal = item.gold_abnormal;

      json record;
      record["index"] = cursor + answer.ordinal - 1;
      record["template"] = item.text;
      record["verdict"] = to_string(observation.predicted.label);
      record["reason"] = answer.reason;
      if (item.gold_abnormal) record["gold"] = *item.gold_abnormal;
      predictions.write(record);

      observations.push_back(std::move(observation));
      ++outcome.predicted;
    }
    cursor += batch_size;
  }

  std::ofstream summary(outcome.run_dir / "summary.txt");
  summary << "task: detect\nstrategy: " << cli_strategy_name(config.strategy) << '\n';
  summary << "corpus: " << corpus.name << " (" << corpus.size() << " rows, test stream "
          << test_stream.size() << " unique templates)\n";
  summary << "predicted: " << outcome.predicted << "  failed batches: " << run.failed << '\n';
  summary << "window: " << config.window << '\n';

  if (has_gold && !observations.empty()) {
    std::vector<bool> pred_labels;
    std::vector<bool> gold_labels;
    for (const TemplateObservation& observation : observations) {
      pred_labels.push_back(observation.predicted.abnormal());
      gold_labels.push_back(*observation.gold_abnormal);
    }
    outcome.reports.push_back(anomaly_f1(pred_labels, gold_labels, ReportLevel::Template));

    const auto sessions = group_sessions(observations, config.window);
    std::vector<bool> session_pred;
    std::vector<bool> session_gold;
    for (const Session& session : sessions) {
      session_pred.push_back(session.predicted_abnormal);
      session_gold.push_back(*session.gold_abnormal);
    }
    outcome.reports.push_back(anomaly_f1(session_pred, session_gold, ReportLevel::Session));

    summary << "sessions: " << sessions.size() << '\n';
    for (const EvalReport& report : outcome.reports) summary << describe(report) << '\n';
    std::ofstream report_out(outcome.run_dir / "report.json");
    report_out << json(outcome.reports).dump(2) << '\n';
  }

  outcome.exit_code = finish_run(config, outcome, run, summary);
  return outcome;
}

RunOutcome cmd_select(const RunConfig& config) {
  RunOutcome outcome;
  outcome.run_dir = prepare_run_dir(config);

  if (config.pool_file.empty()) throw Error("the select command needs --pool");
  const Corpus corpus = load_corpus(config.corpus_path, config.format, config.corpus_name);
  const auto calibration = head_slice(corpus, config.calibration);
  const CandidatePool pool = load_pool(config.pool_file);
  const auto backend = make_backend(config.backend);

  const SelectionResult result =
      select_prompt(pool, calibration, *backend, config.backend, config.budget);

  std::ofstream result_out(outcome.run_dir / "selection.json");
  result_out << json(result).dump(2) << '\n';

  std::string winner_prefix;
  for (const Candidate& candidate : pool.candidates) {
    if (candidate.id == result.winner) winner_prefix = candidate.prefix;
  }
  std::ofstream prefix_out(outcome.run_dir / "winner_prefix.txt");
  prefix_out << winner_prefix << '\n';

  std::ofstream summary(outcome.run_dir / "summary.txt");
  summary << "task: select\ncalibration: " << result.calibration_size << " logs\n";
  for (const auto& [id, score] : result.scores) {
    summary << "candidate " << id << ": s=" << fmt_double(score)
            << (id == result.winner ? "  <- winner" : "") << '\n';
  }
  if (!result.failed_candidates.empty()) {
    summary << "failed candidates:";
    for (const std::string& id : result.failed_candidates) summary << ' ' << id;
    summary << '\n';
  }

  outcome.exit_code = kExitSuccess;
  return outcome;
}

}  // namespace promptlog
