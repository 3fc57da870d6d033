// Command-line front end: parse | detect | select | export-annotations |
// score-annotations. Every flag can also come from a key=value config file
// (--config); flags override the file. Credentials are only ever read from
// the environment variable named by --auth-env.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "promptlog/pipeline.hpp"

namespace {

using namespace promptlog;

struct CliOptions {
  std::string corpus;
  std::string format = "tsv:content";
  std::string name;
  double split_ratio = -1.0;
  long long split_at = -1;
  std::string strategy = "simple";
  std::string cot_mode = "explicit";
  std::size_t m = 0;
  std::uint64_t seed = 17;
  std::string prefix_file;
  std::string pool;
  std::string templates;
  std::size_t calibration = 100;
  std::size_t budget = 4000;
  std::size_t window = 100;
  long long failure_budget = -1;
  std::string backend = "scripted";
  std::string endpoint;
  std::string model;
  std::string auth_env;
  std::string fixtures;
  double temperature = 0.5;
  double retry_step = 0.4;
  std::string retry_mode = "add";
  int max_retries = 2;
  double temperature_cap = 2.0;
  double interval = 0.0;
  int workers = 1;
  double timeout = 60.0;
  std::string out;
};

void add_run_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--corpus", opt.corpus, "corpus file")->required();
  cmd->add_option("--format", opt.format,
                  "corpus format descriptor, e.g. tsv:content,template or csv:header");
  cmd->add_option("--name", opt.name, "corpus name (defaults to the file stem)");
  cmd->add_option("--split-ratio", opt.split_ratio, "train fraction; the run uses the rest");
  cmd->add_option("--split-at", opt.split_at, "train size in logs; the run uses the rest");
  cmd->add_option("--strategy", opt.strategy, "simple|self|cot-implicit|cot-explicit|incontext");
  cmd->add_option("--cot-mode", opt.cot_mode, "implicit|explicit");
  cmd->add_option("--m", opt.m, "number of in-context example pairs (0 = task default)");
  cmd->add_option("--seed", opt.seed, "sampling seed");
  cmd->add_option("--prefix-file", opt.prefix_file, "prompt prefix text file (self strategy)");
  cmd->add_option("--templates", opt.templates, "template-assignment file (detect)");
  cmd->add_option("--budget", opt.budget, "max bytes of one assembled prompt");
  cmd->add_option("--window", opt.window, "session window length (detect)");
  cmd->add_option("--failure-budget", opt.failure_budget,
                  "max failed batches before aborting (-1 = unlimited)");
  cmd->add_option("--backend", opt.backend, "http|scripted");
  cmd->add_option("--endpoint", opt.endpoint, "chat-completions URL (http backend)");
  cmd->add_option("--model", opt.model, "model name sent to the backend");
  cmd->add_option("--auth-env", opt.auth_env,
                  "environment variable holding the API credential");
  cmd->add_option("--fixtures", opt.fixtures, "scripted backend response file");
  cmd->add_option("--temperature", opt.temperature, "initial sampling temperature");
  cmd->add_option("--retry-step", opt.retry_step, "temperature step per retry");
  cmd->add_option("--retry-mode", opt.retry_mode, "add|set");
  cmd->add_option("--max-retries", opt.max_retries, "extra attempts after the first");
  cmd->add_option("--temperature-cap", opt.temperature_cap, "temperature ceiling");
  cmd->add_option("--interval", opt.interval, "min seconds between requests");
  cmd->add_option("--workers", opt.workers, "concurrent in-flight queries");
  cmd->add_option("--timeout", opt.timeout, "request timeout in seconds");
  cmd->add_option("--out", opt.out, "run output directory")->required();
  cmd->set_config("--config", "", "key=value file mirroring these flags");
}

RunConfig to_run_config(const CliOptions& opt, Task task) {
  RunConfig config;
  config.task = task;
  config.corpus_path = opt.corpus;
  config.format = CorpusFormat::parse(opt.format);
  config.corpus_name = opt.name;
  if (opt.split_ratio >= 0.0) config.split_ratio = opt.split_ratio;
  if (opt.split_at >= 0) config.split_count = static_cast<std::size_t>(opt.split_at);
  config.strategy = strategy_from_string(opt.strategy);
  config.cot_mode = cot_mode_from_string(opt.cot_mode);
  if (config.strategy == StrategyTag::CotImplicit) config.cot_mode = CotMode::Implicit;
  if (config.strategy == StrategyTag::CotExplicit) config.cot_mode = CotMode::Explicit;
  config.incontext_m = opt.m;
  config.seed = opt.seed;
  config.prefix_file = opt.prefix_file;
  config.pool_file = opt.pool;
  config.templates_file = opt.templates;
  config.calibration = opt.calibration;
  config.budget = opt.budget;
  config.window = opt.window;
  if (opt.failure_budget >= 0) {
    config.failure_budget = static_cast<std::size_t>(opt.failure_budget);
  }

  BackendConfig& backend = config.backend;
  if (opt.backend == "scripted") {
    backend.kind = BackendKind::Scripted;
  } else if (opt.backend == "http") {
    backend.kind = BackendKind::HttpChat;
  } else {
    throw Error("unknown backend: " + opt.backend + " (expected http or scripted)");
  }
  backend.endpoint = opt.endpoint;
  backend.model_name = opt.model;
  backend.auth_env = opt.auth_env;
  backend.fixtures_path = opt.fixtures;
  backend.initial_temperature = opt.temperature;
  backend.temperature_step = opt.retry_step;
  backend.retry_mode = retry_mode_from_string(opt.retry_mode);
  backend.max_retries = opt.max_retries;
  backend.temperature_cap = opt.temperature_cap;
  backend.min_request_interval_seconds = opt.interval;
  backend.workers = opt.workers;
  backend.timeout_seconds = opt.timeout;

  config.out_dir = opt.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prompt-driven log parsing and anomaly detection pipeline"};
  app.require_subcommand(1);

  CliOptions opt;

  CLI::App* parse_cmd = app.add_subcommand("parse", "parse logs into templates with reasons");
  add_run_flags(parse_cmd, opt);

  CLI::App* detect_cmd =
      app.add_subcommand("detect", "tag a template stream normal/abnormal with reasons");
  add_run_flags(detect_cmd, opt);

  CLI::App* select_cmd =
      app.add_subcommand("select", "score a prompt-candidate pool and pick the best prefix");
  add_run_flags(select_cmd, opt);
  select_cmd->add_option("--pool", opt.pool, "candidate pool file (id<TAB>prefix)")->required();
  select_cmd->add_option("--calibration", opt.calibration, "calibration slice size");

  std::string run_dir;
  std::string sheet;
  std::string out_file;
  std::size_t sample = 0;
  std::uint64_t export_seed = 17;
  int threshold = 4;

  CLI::App* export_cmd = app.add_subcommand(
      "export-annotations", "sample prediction records into a blank rating sheet");
  export_cmd->add_option("--run", run_dir, "run directory")->required();
  export_cmd->add_option("--sample", sample, "number of rows to sample")->required();
  export_cmd->add_option("--seed", export_seed, "sampling seed");
  export_cmd->add_option("--out", out_file, "sheet path (default <run>/annotations.csv)");

  CLI::App* score_cmd =
      app.add_subcommand("score-annotations", "aggregate a filled rating sheet");
  score_cmd->add_option("--sheet", sheet, "filled annotation sheet")->required();
  score_cmd->add_option("--threshold", threshold, "HIP threshold");
  score_cmd->add_option("--out", out_file, "scores JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse_cmd->parsed()) {
      return cmd_parse(to_run_config(opt, Task::Parsing)).exit_code;
    }
    if (detect_cmd->parsed()) {
      return cmd_detect(to_run_config(opt, Task::Anomaly)).exit_code;
    }
    if (select_cmd->parsed()) {
      return cmd_select(to_run_config(opt, Task::Parsing)).exit_code;
    }
    if (export_cmd->parsed()) {
      ExportConfig config;
      config.run_dir = run_dir;
      config.out_file = out_file;
      config.sample = sample;
      config.seed = export_seed;
      return cmd_export_annotations(config);
    }
    if (score_cmd->parsed()) {
      ScoreConfig config;
      config.sheet = sheet;
      config.out_file = out_file;
      config.threshold = threshold;
      return cmd_score_annotations(config);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return promptlog::kExitFatal;
  }
  return promptlog::kExitFatal;
}
