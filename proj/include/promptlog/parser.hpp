// Response parsing: extracts "(i) x-y" answers from raw model text,
// normalizes templates and verdicts, and checks coverage against the batch.
// Parsing never throws on arbitrary text; every pathology is reported
// through ParseDiagnostics instead.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "promptlog/core.hpp"

namespace promptlog {

struct ParseDiagnostics {
  std::vector<std::size_t> missing_ordinals;   ///< expected but absent
  std::vector<std::size_t> duplicate_ordinals; ///< seen more than once (first kept)
  std::vector<std::string> extra_lines;        ///< unmatched or out-of-range lines
  std::vector<std::string> normalization_notes;

  /// A response is format-valid iff no expected ordinal is missing.
  bool format_valid() const { return missing_ordinals.empty(); }
};

/// Scans `text` for lines of the form "(i) x-y". The x/y separator is the
/// first " - " on the line after the ordinal, falling back to the first bare
/// "-" with optional surrounding spaces; later hyphens stay inside the
/// reason. Answers come back sorted by ordinal, first occurrence winning on
/// duplicates. Lines without an ordinal, and ordinals outside
/// [1, expected_n], are tolerated and recorded as extra lines.
std::pair<std::vector<ParsedAnswer>, ParseDiagnostics> parse_numbered_answers(
    std::string_view text, std::size_t expected_n);

/// Like parse_numbered_answers but each line's full remainder is the answer
/// (no x/y split). Used for numbered lists of prompt candidates.
std::pair<std::vector<ParsedAnswer>, ParseDiagnostics> parse_numbered_list(
    std::string_view text, std::size_t expected_n);

/// Canonicalizes an answered template: every known wildcard spelling
/// ("<*>", "〈*〉", "{*}", "[*]", a lone "*" token, "<VAR>",
/// "{{variable}}") becomes "<*>", whitespace runs collapse to single spaces,
/// and tokens containing the wildcard are tagged Variable (rendering as
/// exactly "<*>"). Idempotent. Throws Error when empty after trimming.
/// Applied rewrites are appended to *notes when given.
LogTemplate normalize_template(std::string_view answer_text,
                               std::vector<std::string>* notes = nullptr);

/// Case-insensitive keyword mapping of an x-part onto a verdict. The first
/// recognized word wins: {abnormal, anomalous, anomaly, 1} are abnormal;
/// {normal, 0} are normal. Returns nullopt when no keyword is found.
std::optional<Verdict> try_normalize_verdict(std::string_view answer_text);

/// As try_normalize_verdict but throws Error on unrecognized text.
Verdict normalize_verdict(std::string_view answer_text);

/// True iff ordinals are exactly 1..expected_n and, for the anomaly task,
/// every answer's verdict normalizes.
bool validate_coverage(const std::vector<ParsedAnswer>& answers, std::size_t expected_n,
                       Task task);

}  // namespace promptlog
