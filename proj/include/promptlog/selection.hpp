// Prompt-prefix selection: keep a pool of candidate prefixes, score each one
// on a small calibration slice with gold templates, and pick the argmax of
// s(p) = (RandIndex + F1) / 2.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "promptlog/core.hpp"
#include "promptlog/gateway.hpp"

namespace promptlog {

enum class PoolSource { UserFile, ModelGenerated };

struct Candidate {
  std::string id;
  std::string prefix;

  bool operator==(const Candidate&) const = default;
};

struct CandidatePool {
  std::vector<Candidate> candidates;
  PoolSource source = PoolSource::UserFile;
};

/// Reads a pool file: one candidate per line, "id<TAB>prefix text". Lines
/// starting with '#' are comments. Throws Error on duplicate ids, empty
/// prefixes or an empty pool.
CandidatePool load_pool(const std::filesystem::path& path);

/// Asks the backend for k candidate prompts with one meta-prompt and parses
/// the numbered reply into a pool. `meta_prompt_template` may contain the
/// placeholders {k} and {task}. Retries follow the gateway protocol; an
/// unparseable reply after retries is an error.
CandidatePool elicit_candidates(Backend& backend, const BackendConfig& config, std::size_t k,
                                const std::string& task_description,
                                const std::string& meta_prompt_template);

struct SelectionResult {
  std::map<std::string, double> scores;  ///< candidate id -> s(p)
  std::string winner;
  std::size_t calibration_size = 0;
  std::vector<std::string> failed_candidates;  ///< wholly failed runs, scored 0
};

/// Runs the full pipeline (batch, query, parse, normalize) for every
/// candidate over the calibration logs and scores it. The winner attains the
/// maximal score; ties break to the lowest id (numeric when both ids are
/// integers, lexicographic otherwise). Candidates whose run yields no usable
/// predictions or undefined metrics score 0 and are flagged. Calibration
/// logs must carry gold templates.
SelectionResult select_prompt(const CandidatePool& pool, const std::vector<RawLog>& calibration,
                              Backend& backend, const BackendConfig& config,
                              std::size_t budget);

}  // namespace promptlog
