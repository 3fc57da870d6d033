#include "promptlog/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

namespace promptlog {
namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

/// Matches a leading "(<digits>)" and returns the ordinal plus the remainder.
bool match_ordinal(std::string_view line, std::size_t& ordinal, std::string_view& rest) {
  if (line.empty() || line.front() != '(') return false;
  std::size_t pos = 1;
  std::size_t value = 0;
  bool any = false;
  while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
    value = value * 10 + static_cast<std::size_t>(line[pos] - '0');
    any = true;
    ++pos;
  }
  if (!any || pos >= line.size() || line[pos] != ')') return false;
  ordinal = value;
  rest = trim(line.substr(pos + 1));
  return true;
}

/// Splits "x-y" at the first " - ", falling back to the first bare hyphen
/// with optional surrounding spaces. Without any hyphen the whole text is
/// the x-part.
std::pair<std::string, std::string> split_answer(std::string_view rest) {
  std::size_t pos = rest.find(" - ");
  if (pos != std::string_view::npos) {
    return {std::string(trim(rest.substr(0, pos))), std::string(trim(rest.substr(pos + 3)))};
  }
  pos = rest.find('-');
  if (pos != std::string_view::npos) {
    return {std::string(trim(rest.substr(0, pos))), std::string(trim(rest.substr(pos + 1)))};
  }
  return {std::string(trim(rest)), std::string()};
}

std::pair<std::vector<ParsedAnswer>, ParseDiagnostics> scan_numbered(std::string_view text,
                                                                     std::size_t expected_n,
                                                                     bool split_xy) {
  std::map<std::size_t, ParsedAnswer> by_ordinal;
  ParseDiagnostics diagnostics;

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = trim(text.substr(line_start, line_end - line_start));
    line_start = line_end + 1;
    if (line.empty()) continue;

    std::size_t ordinal = 0;
    std::string_view rest;
    if (!match_ordinal(line, ordinal, rest) || ordinal == 0 || ordinal > expected_n) {
      diagnostics.extra_lines.emplace_back(line);
      continue;
    }
    if (by_ordinal.contains(ordinal)) {
      diagnostics.duplicate_ordinals.push_back(ordinal);
      continue;
    }
    ParsedAnswer answer;
    answer.ordinal = ordinal;
    if (split_xy) {
      auto [x, y] = split_answer(rest);
      answer.answer = std::move(x);
      answer.reason = std::move(y);
    } else {
      answer.answer = std::string(rest);
    }
    by_ordinal.emplace(ordinal, std::move(answer));
  }

  for (std::size_t i = 1; i <= expected_n; ++i) {
    if (!by_ordinal.contains(i)) diagnostics.missing_ordinals.push_back(i);
  }

  std::vector<ParsedAnswer> answers;
  answers.reserve(by_ordinal.size());
  for (auto& [_, answer] : by_ordinal) answers.push_back(std::move(answer));
  return {std::move(answers), std::move(diagnostics)};
}

// Bracketed wildcard spellings rewrite anywhere, including inside mixed
// tokens like "id=[*]". A bare "*" only counts when it is a whole token and
// is handled during tokenization.
constexpr std::array<std::string_view, 6> kWildcardSpellings = {
    "〈*〉", "⟨*⟩", "{*}", "[*]", "<VAR>", "{{variable}}",
};

std::size_t replace_all(std::string& text, std::string_view from, std::string_view to) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
    ++count;
  }
  return count;
}

}  // namespace

std::pair<std::vector<ParsedAnswer>, ParseDiagnostics> parse_numbered_answers(
    std::string_view text, std::size_t expected_n) {
  return scan_numbered(text, expected_n, /*split_xy=*/true);
}

std::pair<std::vector<ParsedAnswer>, ParseDiagnostics> parse_numbered_list(
    std::string_view text, std::size_t expected_n) {
  return scan_numbered(text, expected_n, /*split_xy=*/false);
}

LogTemplate normalize_template(std::string_view answer_text, std::vector<std::string>* notes) {
  std::string work(trim(answer_text));
  if (work.empty()) throw Error("normalize_template: empty template text");

  for (std::string_view spelling : kWildcardSpellings) {
    if (replace_all(work, spelling, kWildcard) > 0 && notes) {
      notes->push_back("rewrote " + std::string(spelling) + " -> " + kWildcard);
    }
  }

  const bool collapsed =
      work.find("  ") != std::string::npos ||
      std::any_of(work.begin(), work.end(), [](unsigned char c) {
        return std::isspace(c) && c != ' ';
      });

  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < work.size()) {
    while (pos < work.size() && std::isspace(static_cast<unsigned char>(work[pos]))) ++pos;
    if (pos >= work.size()) break;
    std::size_t end = pos;
    while (end < work.size() && !std::isspace(static_cast<unsigned char>(work[end]))) ++end;
    std::string token_text = work.substr(pos, end - pos);
    if (token_text == "*") {
      if (notes) notes->push_back("rewrote * -> <*>");
      token_text = kWildcard;
    }
    Token token;
    token.kind = token_text.find(kWildcard) != std::string::npos ? TokenKind::Variable
                                                                 : TokenKind::Static;
    token.text = std::move(token_text);
    tokens.push_back(std::move(token));
    pos = end;
  }
  if (collapsed && notes) notes->push_back("collapsed whitespace");
  return LogTemplate::from_tokens(std::move(tokens));
}

std::optional<Verdict> try_normalize_verdict(std::string_view answer_text) {
  static const std::set<std::string> kAbnormal = {"abnormal", "anomalous", "anomaly", "1"};
  static const std::set<std::string> kNormal = {"normal", "0"};

  std::string word;
  auto classify = [&](const std::string& w) -> std::optional<Verdict> {
    if (kAbnormal.contains(w)) return Verdict::Abnormal;
    if (kNormal.contains(w)) return Verdict::Normal;
    return std::nullopt;
  };
  for (char c : answer_text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      continue;
    }
    if (!word.empty()) {
      if (auto verdict = classify(word)) return verdict;
      word.clear();
    }
  }
  if (!word.empty()) {
    if (auto verdict = classify(word)) return verdict;
  }
  return std::nullopt;
}

Verdict normalize_verdict(std::string_view answer_text) {
  if (auto verdict = try_normalize_verdict(answer_text)) return *verdict;
  throw Error("normalize_verdict: unrecognized verdict text: " + std::string(answer_text));
}

bool validate_coverage(const std::vector<ParsedAnswer>& answers, std::size_t expected_n,
                       Task task) {
  std::set<std::size_t> seen;
  for (const auto& answer : answers) seen.insert(answer.ordinal);
  if (seen.size() != expected_n) return false;
  if (!seen.empty() && (*seen.begin() != 1 || *seen.rbegin() != expected_n)) return false;
  if (task == Task::Anomaly) {
    for (const auto& answer : answers) {
      if (!try_normalize_verdict(answer.answer)) return false;
    }
  }
  return true;
}

}  // namespace promptlog
