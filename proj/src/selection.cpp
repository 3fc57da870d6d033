#include "promptlog/selection.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "promptlog/metrics.hpp"
#include "promptlog/parser.hpp"
#include "promptlog/prompt.hpp"

namespace promptlog {
namespace {

bool all_digits(const std::string& text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

/// Numeric order when both ids are integers, lexicographic otherwise.
bool id_less(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

std::string substitute(std::string text, std::string_view placeholder, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

CandidatePool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pool file: " + path.string());
  CandidatePool pool;
  pool.source = PoolSource::UserFile;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(path.string() + ":" + std::to_string(line_number) +
                  ": expected 'id<TAB>prefix text'");
    }
    Candidate candidate;
    candidate.id = line.substr(0, tab);
    candidate.prefix = line.substr(tab + 1);
    if (candidate.prefix.empty()) {
      throw Error(path.string() + ":" + std::to_string(line_number) + ": empty prefix");
    }
    if (!seen.insert(candidate.id).second) {
      throw Error(path.string() + ":" + std::to_string(line_number) + ": duplicate id '" +
                  candidate.id + "'");
    }
    pool.candidates.push_back(std::move(candidate));
  }
  if (pool.candidates.empty()) throw Error("pool file is empty: " + path.string());
  return pool;
}

CandidatePool elicit_candidates(Backend& backend, const BackendConfig& config, std::size_t k,
                                const std::string& task_description,
                                const std::string& meta_prompt_template) {
  if (k < 1) throw Error("elicit_candidates: k must be at least 1");
  std::string meta = substitute(meta_prompt_template, "{k}", std::to_string(k));
  meta = substitute(std::move(meta), "{task}", task_description);

  // The meta-prompt goes out verbatim; it carries its own list format.
  const QueryResult result =
      query_raw_with_retry(backend, config, meta, make_list_validator(k));
  if (!result.ok()) {
    throw GatewayError("candidate elicitation failed: reply never parsed as a numbered list of " +
                       std::to_string(k));
  }

  CandidatePool pool;
  pool.source = PoolSource::ModelGenerated;
  for (const ParsedAnswer& answer : result.answers) {
    pool.candidates.push_back({std::to_string(answer.ordinal), answer.answer});
  }
  return pool;
}

SelectionResult select_prompt(const CandidatePool& pool, const std::vector<RawLog>& calibration,
                              Backend& backend, const BackendConfig& config,
                              std::size_t budget) {
  if (pool.candidates.empty()) throw Error("select_prompt: empty candidate pool");
  if (calibration.empty()) throw Error("select_prompt: empty calibration slice");
  for (const RawLog& log : calibration) {
    if (!log.gold_template) {
      throw Error("select_prompt: calibration log " + std::to_string(log.index) +
                  " lacks a gold template");
    }
  }

  std::vector<std::string> contents;
  contents.reserve(calibration.size());
  for (const RawLog& log : calibration) contents.push_back(log.content);

  SelectionResult result;
  result.calibration_size = calibration.size();

  for (const Candidate& candidate : pool.candidates) {
    double score = 0.0;
    bool failed = false;
    try {
      const std::string directive = answer_control(kAnswerRangeParsing);
      const auto batches = batch_logs(contents, budget, candidate.prefix, directive);

      std::vector<PromptSpec> prompts;
      std::vector<std::size_t> expected;
      for (const auto& batch : batches) {
        prompts.push_back(build_self_prompt(batch, candidate.prefix, Task::Parsing));
        expected.push_back(batch.size());
      }
      const auto outcomes = run_queries(backend, config, prompts, expected, [&](std::size_t i) {
        return make_coverage_validator(expected[i], Task::Parsing);
      });

      std::vector<std::pair<LogTemplate, LogTemplate>> pairs;
      std::vector<std::string> pred_assignment;
      std::vector<std::string> gold_assignment;
      std::size_t log_cursor = 0;
      for (std::size_t b = 0; b < outcomes.size(); ++b) {
        const std::size_t batch_size = expected[b];
        if (outcomes[b].ok()) {
          for (const ParsedAnswer& answer : outcomes[b].answers) {
            const RawLog& log = calibration[log_cursor + answer.ordinal - 1];
            LogTemplate pred = normalize_template(answer.answer);
            LogTemplate gold = normalize_template(*log.gold_template);
            pred_assignment.push_back(pred.text);
            gold_assignment.push_back(gold.text);
            pairs.emplace_back(std::move(pred), std::move(gold));
          }
        }
        log_cursor += batch_size;
      }

      if (pairs.empty()) {
        failed = true;
      } else {
        EvalReport report = parsing_f1(pairs);
        if (pairs.size() >= 2) {
          report.rand_index = rand_index(pred_assignment, gold_assignment);
        }
        score = prompt_score(report);
      }
    } catch (const Error&) {
      failed = true;
    }
    if (failed) {
      score = 0.0;
      result.failed_candidates.push_back(candidate.id);
    }
    result.scores[candidate.id] = score;
  }

  result.winner = pool.candidates.front().id;
  for (const Candidate& candidate : pool.candidates) {
    const double score = result.scores[candidate.id];
    const double best = result.scores[result.winner];
    if (score > best || (score == best && id_less(candidate.id, result.winner))) {
      result.winner = candidate.id;
    }
  }
  return result;
}

}  // namespace promptlog
