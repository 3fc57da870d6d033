#include "promptlog/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delimited.hpp"
#include "rng.hpp"

namespace promptlog {
namespace {

ColumnKind column_from_name(const std::string& name, const std::string& where) {
  if (name == "content") return ColumnKind::Content;
  if (name == "template" || name == "gold_template") return ColumnKind::Template;
  if (name == "anomaly" || name == "gold_anomaly") return ColumnKind::Anomaly;
  if (name == "timestamp") return ColumnKind::Timestamp;
  throw CorpusError(where + ": unknown column name '" + name + "'");
}

std::string trim_copy(const std::string& text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

void validate_columns(const std::vector<ColumnKind>& columns, const std::string& where) {
  if (std::count(columns.begin(), columns.end(), ColumnKind::Content) != 1) {
    throw CorpusError(where + ": format must declare exactly one content column");
  }
  for (ColumnKind kind : {ColumnKind::Template, ColumnKind::Anomaly, ColumnKind::Timestamp}) {
    if (std::count(columns.begin(), columns.end(), kind) > 1) {
      throw CorpusError(where + ": duplicate column in format");
    }
  }
}

}  // namespace

CorpusFormat CorpusFormat::tsv(std::vector<ColumnKind> columns) {
  CorpusFormat format;
  format.delimiter = '\t';
  format.columns = std::move(columns);
  return format;
}

CorpusFormat CorpusFormat::csv(std::vector<ColumnKind> columns) {
  CorpusFormat format;
  format.delimiter = ',';
  format.columns = std::move(columns);
  return format;
}

CorpusFormat CorpusFormat::parse(const std::string& descriptor) {
  const auto colon = descriptor.find(':');
  const std::string kind = descriptor.substr(0, colon);
  CorpusFormat format;
  if (kind == "tsv") {
    format.delimiter = '\t';
  } else if (kind == "csv") {
    format.delimiter = ',';
  } else {
    throw CorpusError("unknown corpus format '" + kind + "' (expected tsv or csv)");
  }
  if (colon == std::string::npos || colon + 1 >= descriptor.size()) {
    throw CorpusError("format descriptor needs columns or 'header', e.g. tsv:content,template");
  }
  const std::string spec = descriptor.substr(colon + 1);
  if (spec == "header") {
    format.header = true;
    return format;
  }
  std::stringstream stream(spec);
  std::string name;
  while (std::getline(stream, name, ',')) {
    format.columns.push_back(column_from_name(trim_copy(name), "format descriptor"));
  }
  validate_columns(format.columns, "format descriptor");
  return format;
}

Corpus load_corpus(const std::filesystem::path& path, const CorpusFormat& format,
                   std::string name) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path.string());

  Corpus corpus;
  corpus.name = name.empty() ? path.stem().string() : std::move(name);

  std::vector<ColumnKind> columns = format.columns;
  std::string line;
  std::size_t line_number = 0;

  if (format.header) {
    if (!std::getline(in, line)) throw CorpusError(path.string() + ": empty file");
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    columns.clear();
    for (const std::string& cell : detail::split_delimited(line, format.delimiter)) {
      columns.push_back(column_from_name(trim_copy(cell), path.string() + " header"));
    }
    validate_columns(columns, path.string() + " header");
  } else if (columns.empty()) {
    throw CorpusError("corpus format declares no columns and no header");
  }

  const bool has_template_column =
      std::find(columns.begin(), columns.end(), ColumnKind::Template) != columns.end();
  const bool has_anomaly_column =
      std::find(columns.begin(), columns.end(), ColumnKind::Anomaly) != columns.end();

  const std::string* previous_timestamp = nullptr;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = detail::split_delimited(line, format.delimiter);
    if (fields.size() != columns.size()) {
      throw CorpusError(path.string() + ":" + std::to_string(line_number) + ": expected " +
                        std::to_string(columns.size()) + " columns, found " +
                        std::to_string(fields.size()));
    }

    RawLog log;
    log.index = corpus.logs.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string where = path.string() + ":" + std::to_string(line_number);
      switch (columns[i]) {
        case ColumnKind::Content:
          log.content = fields[i];
          if (trim_copy(log.content).empty()) {
            throw CorpusError(where + ": empty log content");
          }
          break;
        case ColumnKind::Template:
          if (trim_copy(fields[i]).empty()) {
            throw CorpusError(where + ": inconsistent labeling, empty template cell");
          }
          log.gold_template = fields[i];
          break;
        case ColumnKind::Anomaly: {
          const std::string value = trim_copy(fields[i]);
          if (value == "0") {
            log.gold_anomaly = false;
          } else if (value == "1") {
            log.gold_anomaly = true;
          } else {
            throw CorpusError(where + ": anomaly label must be 0 or 1, found '" + value + "'");
          }
          break;
        }
        case ColumnKind::Timestamp:
          if (trim_copy(fields[i]).empty()) {
            throw CorpusError(where + ": inconsistent labeling, empty timestamp cell");
          }
          log.timestamp = fields[i];
          break;
      }
    }
    if (log.timestamp && previous_timestamp && *log.timestamp < *previous_timestamp) {
      throw CorpusError(path.string() + ":" + std::to_string(line_number) +
                        ": timestamps are not chronological");
    }
    corpus.logs.push_back(std::move(log));
    if (corpus.logs.back().timestamp) previous_timestamp = &*corpus.logs.back().timestamp;
  }

  corpus.has_templates = has_template_column && !corpus.logs.empty();
  corpus.has_anomaly_labels = has_anomaly_column && !corpus.logs.empty();
  return corpus;
}

Split chronological_split(const Corpus& corpus, double ratio) {
  if (ratio < 0.0 || ratio > 1.0) throw CorpusError("split ratio must lie in [0, 1]");
  const auto cut = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(corpus.logs.size())));
  Split split;
  split.ratio = ratio;
  split.train.assign(corpus.logs.begin(), corpus.logs.begin() + static_cast<std::ptrdiff_t>(cut));
  split.test.assign(corpus.logs.begin() + static_cast<std::ptrdiff_t>(cut), corpus.logs.end());
  return split;
}

Split split_at(const Corpus& corpus, std::size_t k) {
  const std::size_t cut = std::min(k, corpus.logs.size());
  Split split;
  split.ratio = corpus.logs.empty()
                    ? 0.0
                    : static_cast<double>(cut) / static_cast<double>(corpus.logs.size());
  split.train.assign(corpus.logs.begin(), corpus.logs.begin() + static_cast<std::ptrdiff_t>(cut));
  split.test.assign(corpus.logs.begin() + static_cast<std::ptrdiff_t>(cut), corpus.logs.end());
  return split;
}

std::vector<RawLog> head_slice(const Corpus& corpus, std::size_t n) {
  const std::size_t count = std::min(n, corpus.logs.size());
  return {corpus.logs.begin(), corpus.logs.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::vector<LabelledPair> sample_incontext_pairs(const Corpus& corpus, std::size_t m, Task task,
                                                 std::uint64_t seed) {
  std::vector<LabelledPair> pairs;
  if (m == 0) return pairs;
  detail::Rng rng(seed);

  if (task == Task::Anomaly) {
    if (!corpus.has_anomaly_labels) {
      throw CorpusError("in-context sampling needs anomaly labels on corpus '" + corpus.name +
                        "'");
    }
    std::vector<std::size_t> abnormal;
    std::vector<std::size_t> normal;
    for (const RawLog& log : corpus.logs) {
      (*log.gold_anomaly ? abnormal : normal).push_back(log.index);
    }
    const std::size_t need_abnormal = (m + 1) / 2;
    const std::size_t need_normal = m / 2;
    if (abnormal.size() < need_abnormal || normal.size() < need_normal) {
      throw CorpusError("not enough labelled examples: need " + std::to_string(need_abnormal) +
                        " abnormal and " + std::to_string(need_normal) + " normal, corpus has " +
                        std::to_string(abnormal.size()) + "/" + std::to_string(normal.size()));
    }
    const auto abnormal_picks = detail::sample_indices(abnormal.size(), need_abnormal, rng);
    const auto normal_picks = detail::sample_indices(normal.size(), need_normal, rng);
    for (std::size_t i = 0; i < m; ++i) {
      if (i % 2 == 0) {
        pairs.push_back({corpus.logs[abnormal[abnormal_picks[i / 2]]].content, "1"});
      } else {
        pairs.push_back({corpus.logs[normal[normal_picks[i / 2]]].content, "0"});
      }
    }
    return pairs;
  }

  if (!corpus.has_templates) {
    throw CorpusError("in-context sampling needs gold templates on corpus '" + corpus.name +
                      "'");
  }
  if (corpus.logs.size() < m) {
    throw CorpusError("not enough labelled examples: need " + std::to_string(m) +
                      ", corpus has " + std::to_string(corpus.logs.size()));
  }
  for (std::size_t pick : detail::sample_indices(corpus.logs.size(), m, rng)) {
    pairs.push_back({corpus.logs[pick].content, *corpus.logs[pick].gold_template});
  }
  return pairs;
}

std::vector<std::pair<std::size_t, std::string>> load_template_assignments(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open template-assignment file: " + path.string());
  std::vector<std::pair<std::size_t, std::string>> assignments;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw CorpusError(path.string() + ":" + std::to_string(line_number) +
                        ": expected 'index<TAB>template'");
    }
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw CorpusError(path.string() + ":" + std::to_string(line_number) +
                        ": index is not a number");
    }
    std::string text = line.substr(tab + 1);
    if (trim_copy(text).empty()) {
      throw CorpusError(path.string() + ":" + std::to_string(line_number) + ": empty template");
    }
    assignments.emplace_back(index, std::move(text));
  }
  return assignments;
}

}  // namespace promptlog
