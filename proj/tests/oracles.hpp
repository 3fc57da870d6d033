// Independent brute-force oracles. These recompute the metrics from first
// principles over raw data and must stay decoupled from the library's
// implementation path.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace testutil {

/// Variable flags straight from a canonical template text: split on single
/// spaces, a token is a variable iff it is exactly "<*>".
inline std::vector<bool> variable_flags(const std::string& template_text) {
  std::vector<bool> flags;
  std::string token;
  for (char c : template_text) {
    if (c == ' ') {
      if (!token.empty()) flags.push_back(token == "<*>");
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) flags.push_back(token == "<*>");
  return flags;
}

struct OracleCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Per-token recount over two canonical template texts with tail padding.
inline OracleCounts recount_tokens(const std::string& pred_text, const std::string& gold_text) {
  const auto pred = variable_flags(pred_text);
  const auto gold = variable_flags(gold_text);
  const std::size_t length = pred.size() > gold.size() ? pred.size() : gold.size();
  OracleCounts counts;
  for (std::size_t i = 0; i < length; ++i) {
    const bool p = i < pred.size() && pred[i];
    const bool g = i < gold.size() && gold[i];
    if (g && p) ++counts.tp;
    if (!g && !p) ++counts.tn;
    if (!g && p) ++counts.fp;
    if (g && !p) ++counts.fn;
  }
  return counts;
}

/// Rand index by explicit enumeration of the C(N,2) unordered pairs.
template <typename T>
double pairwise_rand_index(const std::vector<T>& pred, const std::vector<T>& gold) {
  const std::size_t n = pred.size();
  std::size_t agreements = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool together_pred = pred[i] == pred[j];
      const bool together_gold = gold[i] == gold[j];
      if (together_pred == together_gold) ++agreements;
      ++total;
    }
  }
  return static_cast<double>(agreements) / static_cast<double>(total);
}

/// Session label by scanning every member.
inline bool any_abnormal(const std::vector<bool>& members, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i < last; ++i) {
    if (members[i]) return true;
  }
  return false;
}

}  // namespace testutil
