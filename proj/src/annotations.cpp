// Annotation sheet export and scoring: turns prediction records into a
// rating sheet for human reviewers and aggregates filled sheets into Mean
// and HIP per dimension.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "promptlog/json_io.hpp"
#include "promptlog/metrics.hpp"
#include "promptlog/parser.hpp"
#include "promptlog/pipeline.hpp"

#include "delimited.hpp"
#include "rng.hpp"

namespace promptlog {
namespace {

// Scoring rubric embedded at the top of every exported sheet. Ratings:
// 1 not interpretable, 2 low, 3 moderate, 4 high, 5 very high.
constexpr const char* kRatingCriteria = R"(Rate each row on two dimensions with a 1..5 score.
Usefulness, log parsing:
 1 - No variable is extracted, or explanations of those variables are irrelevant.
 2 - Explanations are meaningless or logically wrong, hindering engineers from interpreting the logs.
 3 - Variables with appropriate classes are partially extracted, and explanations are somewhat relevant.
 4 - Variables with appropriate classes are mostly extracted, and explanations are specific and relevant. Engineers can understand the logs with less effort.
 5 - Variables are fully and correctly extracted, and explanations are detailed, specific and relevant, enabling easy and precise understanding of logs.
Usefulness, anomaly detection:
 1 - No justification on the anomaly beyond a simple prediction label.
 2 - The justification for the prediction is irrelevant, or logically inconsistent with the facts.
 3 - The justification well supports the predictions, but may lack clarity and details.
 4 - Specific, accurate, and relevant justification is presented, which positively assists engineers in eliminating false alarms and further analysis.
 5 - Detailed, relevant and clear justification that significantly assists engineers in ruling out false alarms and locating the root cause.
Readability:
 1 - The text contains numerous unintelligible elements or grammatical mistakes.
 2 - Most of the generated text is readable, but it may have grammar errors or unclear phrases.
 3 - The text has few grammar errors, although some terms may need refinement.
 4 - The text is clear, grammatically correct, with only a minimal number of technical terms possibly needing refinement.
 5 - The text is clear, detailed, grammatically perfect, and professional for software engineering.)";

struct Prediction {
  json record;
  bool correct_or_unlabelled = false;
};

std::string snapshot_value(const std::filesystem::path& run_dir, const std::string& key) {
  std::ifstream in(run_dir / "config.snapshot");
  if (!in) throw Error("run directory has no config.snapshot: " + run_dir.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

std::vector<json> read_predictions(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / "predictions.jsonl");
  if (!in) throw Error("run directory has no predictions.jsonl: " + run_dir.string());
  std::vector<json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(json::parse(line));
  }
  return records;
}

std::vector<std::size_t> draw(const std::vector<std::size_t>& eligible, std::size_t count,
                              detail::Rng& rng) {
  std::vector<std::size_t> out;
  for (std::size_t pick : detail::sample_indices(eligible.size(), count, rng)) {
    out.push_back(eligible[pick]);
  }
  return out;
}

int parse_score(const std::string& cell, std::size_t row, const char* column) {
  const auto begin = cell.find_first_not_of(" \t");
  if (begin == std::string::npos) {
    throw Error("sheet row " + std::to_string(row) + " has no " + column + " score");
  }
  try {
    return std::stoi(cell);
  } catch (const std::exception&) {
    throw Error("sheet row " + std::to_string(row) + ": " + column + " score '" + cell +
                "' is not a number");
  }
}

}  // namespace

int cmd_export_annotations(const ExportConfig& config) {
  const std::string task_name = snapshot_value(config.run_dir, "task");
  if (task_name.empty()) throw Error("config.snapshot does not name the task");
  const bool anomaly = task_name == "detect";
  const auto records = read_predictions(config.run_dir);

  std::vector<std::size_t> chosen;
  detail::Rng rng(config.seed);

  if (anomaly) {
    std::vector<std::size_t> abnormal;
    std::vector<std::size_t> normal;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const json& record = records[i];
      const std::string verdict = record.at("verdict").get<std::string>();
      if (record.contains("gold")) {
        const bool gold = record.at("gold").get<bool>();
        if ((verdict == "abnormal") != gold) continue;  // incorrect predictions excluded
      }
      (verdict == "abnormal" ? abnormal : normal).push_back(i);
    }
    const std::size_t need_abnormal = (config.sample + 1) / 2;
    const std::size_t need_normal = config.sample / 2;
    if (abnormal.size() < need_abnormal || normal.size() < need_normal) {
      throw Error("not enough eligible records: need " + std::to_string(need_abnormal) +
                  " abnormal and " + std::to_string(need_normal) + " normal, have " +
                  std::to_string(abnormal.size()) + "/" + std::to_string(normal.size()));
    }
    for (std::size_t i : draw(abnormal, need_abnormal, rng)) chosen.push_back(i);
    for (std::size_t i : draw(normal, need_normal, rng)) chosen.push_back(i);
  } else {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const json& record = records[i];
      const std::string text = record.at("template").get<std::string>();
      if (text.find(kWildcard) == std::string::npos) continue;  // needs >= 1 variable
      if (record.contains("gold_template") &&
          record.at("gold_template").get<std::string>() != text) {
        continue;
      }
      eligible.push_back(i);
    }
    if (eligible.size() < config.sample) {
      throw Error("not enough eligible records: need " + std::to_string(config.sample) +
                  ", have " + std::to_string(eligible.size()));
    }
    chosen = draw(eligible, config.sample, rng);
  }

  const std::filesystem::path out_path =
      config.out_file.empty() ? config.run_dir / "annotations.csv" : config.out_file;
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write annotation sheet: " + out_path.string());

  std::istringstream criteria(kRatingCriteria);
  std::string line;
  while (std::getline(criteria, line)) out << "# " << line << '\n';
  out << detail::join_delimited({"row", "index", "input", "prediction", "reason", "usefulness",
                                 "readability"},
                                ',')
      << '\n';

  std::size_t row = 1;
  for (std::size_t i : chosen) {
    const json& record = records[i];
    const std::string input = anomaly ? record.at("template").get<std::string>()
                                      : record.at("content").get<std::string>();
    const std::string prediction = anomaly ? record.at("verdict").get<std::string>()
                                           : record.at("template").get<std::string>();
    out << detail::join_delimited({std::to_string(row),
                                   std::to_string(record.at("index").get<std::size_t>()), input,
                                   prediction, record.at("reason").get<std::string>(), "", ""},
                                  ',')
        << '\n';
    ++row;
  }
  return kExitSuccess;
}

int cmd_score_annotations(const ScoreConfig& config) {
  std::ifstream in(config.sheet);
  if (!in) throw Error("cannot open annotation sheet: " + config.sheet.string());

  std::vector<int> usefulness;
  std::vector<int> readability;
  std::string line;
  bool header_seen = false;
  std::size_t usefulness_column = 0;
  std::size_t readability_column = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split_delimited(line, ',');
    if (!header_seen) {
      header_seen = true;
      const auto find_column = [&](const std::string& name) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) throw Error("sheet header lacks a '" + name + "' column");
        return static_cast<std::size_t>(it - fields.begin());
      };
      usefulness_column = find_column("usefulness");
      readability_column = find_column("readability");
      continue;
    }
    ++row;
    if (fields.size() <= std::max(usefulness_column, readability_column)) {
      throw Error("sheet row " + std::to_string(row) + " is short");
    }
    usefulness.push_back(parse_score(fields[usefulness_column], row, "usefulness"));
    readability.push_back(parse_score(fields[readability_column], row, "readability"));
  }
  if (usefulness.empty()) throw Error("annotation sheet has no filled rows");

  json result;
  for (const auto& [name, scores] :
       {std::pair<std::string, const std::vector<int>&>{"usefulness", usefulness},
        {"readability", readability}}) {
    const RatingSummary at_least = rating_summary(scores, config.threshold, HipMode::AtLeast);
    const RatingSummary strict = rating_summary(scores, config.threshold, HipMode::Strict);
    result[name] = {{"mean", at_least.mean},
                    {"hip_at_least", at_least.hip},
                    {"hip_strict", strict.hip},
                    {"n", scores.size()}};
    std::cout << name << ": mean=" << at_least.mean << " hip(at-least)=" << at_least.hip
              << " hip(strict)=" << strict.hip << " n=" << scores.size() << '\n';
  }
  if (!config.out_file.empty()) {
    std::ofstream out(config.out_file);
    if (!out) throw Error("cannot write scores file: " + config.out_file.string());
    out << result.dump(2) << '\n';
  }
  return kExitSuccess;
}

}  // namespace promptlog
