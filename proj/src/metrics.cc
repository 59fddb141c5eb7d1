// Copyright 2026 The wcnslu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wcnslu/metrics.h"

#include <algorithm>
#include <cctype>
#include <map>

#include "wcnslu/error.h"

namespace wcnslu {

namespace {

// Alignment cost in lexicographic order: fewest errors, then most hits, then
// most substitutions. All three components accumulate additively along an
// alignment, so cell-wise comparison is safe.
struct Cost {
  int errors = 0;
  int hits = 0;
  int subs = 0;

  Cost operator+(const Cost& o) const {
    return {errors + o.errors, hits + o.hits, subs + o.subs};
  }
  bool operator<(const Cost& o) const {
    if (errors != o.errors) return errors < o.errors;
    if (hits != o.hits) return hits > o.hits;
    return subs > o.subs;
  }
};

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> SplitWhitespace(const std::string& text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string StripPunct(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (!std::ispunct(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

}  // namespace

EditAlignment EditAlign(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref) {
  const size_t n = hyp.size(), m = ref.size();
  std::vector<std::vector<Cost>> dp(n + 1, std::vector<Cost>(m + 1));
  for (size_t i = 1; i <= n; ++i) dp[i][0] = Cost{static_cast<int>(i), 0, 0};
  for (size_t j = 1; j <= m; ++j) dp[0][j] = Cost{static_cast<int>(j), 0, 0};
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      Cost diag = dp[i - 1][j - 1] +
                  (hyp[i - 1] == ref[j - 1] ? Cost{0, 1, 0} : Cost{1, 0, 1});
      Cost ins = dp[i - 1][j] + Cost{1, 0, 0};
      Cost del = dp[i][j - 1] + Cost{1, 0, 0};
      dp[i][j] = std::min({diag, ins, del});
    }
  }
  const Cost& best = dp[n][m];
  EditAlignment out;
  out.ref_len = static_cast<int>(m);
  out.hits = best.hits;
  out.substitutions = best.subs;
  out.deletions = static_cast<int>(m) - best.hits - best.subs;
  out.insertions = best.errors - best.subs - out.deletions;
  return out;
}

double Wer(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (ref.empty()) throw EmptyReference("WER needs a nonempty reference");
  EditAlignment a = EditAlign(hyp, ref);
  return 100.0 * a.errors() / a.ref_len;
}

std::vector<std::string> WerTokens(const std::string& text) {
  return SplitWhitespace(StripPunct(Lower(text)));
}

const ScoredHypothesis& SelectOracle(const std::vector<ScoredHypothesis>& nbest,
                                     const std::vector<std::string>& ref) {
  if (nbest.empty()) throw EmptyNBest("oracle selection over an empty n-best list");
  size_t best = 0;
  int best_dist = EditAlign(nbest[0].words, ref).errors();
  for (size_t i = 1; i < nbest.size(); ++i) {
    int dist = EditAlign(nbest[i].words, ref).errors();
    if (dist < best_dist || (dist == best_dist && nbest[i].score > nbest[best].score)) {
      best = i;
      best_dist = dist;
    }
  }
  return nbest[best];
}

std::vector<std::string> NormalizeAnswer(const std::string& text) {
  std::vector<std::string> tokens = SplitWhitespace(StripPunct(Lower(text)));
  std::vector<std::string> kept;
  for (std::string& t : tokens) {
    if (t == "a" || t == "an" || t == "the") continue;
    kept.push_back(std::move(t));
  }
  return kept;
}

double TokenF1(const std::vector<std::string>& pred,
               const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const std::string& t : gold) ++counts[t];
  int overlap = 0;
  for (const std::string& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / pred.size();
  double recall = static_cast<double>(overlap) / gold.size();
  return 2.0 * precision * recall / (precision + recall);
}

double UnigramF1(const std::string& pred, const std::string& gold, bool normalize) {
  if (normalize) return TokenF1(NormalizeAnswer(pred), NormalizeAnswer(gold));
  return TokenF1(SplitWhitespace(pred), SplitWhitespace(gold));
}

int ExactMatch(const std::string& pred, const std::string& gold, bool normalize) {
  if (normalize) return NormalizeAnswer(pred) == NormalizeAnswer(gold) ? 1 : 0;
  return SplitWhitespace(pred) == SplitWhitespace(gold) ? 1 : 0;
}

std::optional<std::string> MatchIntent(const std::string& llm_output,
                                       const std::vector<std::string>& label_set) {
  if (label_set.empty()) throw EmptyLabelSet("intent label set is empty");
  std::string out = Lower(llm_output);
  // Collapse whitespace so "  flight " compares equal to "flight".
  std::string canon;
  for (const std::string& t : SplitWhitespace(out)) {
    if (!canon.empty()) canon += ' ';
    canon += t;
  }
  std::vector<std::string> sorted_labels = label_set;
  std::sort(sorted_labels.begin(), sorted_labels.end());
  for (const std::string& label : sorted_labels) {
    if (canon == Lower(label)) return label;
  }
  const std::string* best = nullptr;
  size_t best_pos = std::string::npos;
  for (const std::string& label : sorted_labels) {
    size_t pos = out.find(Lower(label));
    if (pos != std::string::npos && pos < best_pos) {
      best = &label;
      best_pos = pos;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

}  // namespace wcnslu
