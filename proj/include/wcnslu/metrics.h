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

#ifndef WCNSLU_METRICS_H_
#define WCNSLU_METRICS_H_

#include <optional>
#include <string>
#include <vector>

#include "wcnslu/lattice.h"

namespace wcnslu {

struct EditAlignment {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int hits = 0;
  int ref_len = 0;

  int errors() const { return substitutions + deletions + insertions; }
};

// Unit-cost Levenshtein alignment minimizing S+D+I; among minimal alignments
// prefers more hits, then more substitutions (fewer deletions).
EditAlignment EditAlign(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref);

// 100 * (S+D+I) / ref_len; may exceed 100. Throws EmptyReference.
double Wer(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

// Lowercases, strips punctuation characters, splits on whitespace. Articles
// are kept; this is the transcript-style tokenization WER runs on.
std::vector<std::string> WerTokens(const std::string& text);

// The n-best hypothesis with the lowest edit distance to the reference; ties
// go to the higher ASR score, then the earlier list position. Throws
// EmptyNBest.
const ScoredHypothesis& SelectOracle(const std::vector<ScoredHypothesis>& nbest,
                                     const std::vector<std::string>& ref);

// SQuAD-style answer normalization: lowercase, strip punctuation, drop the
// articles a/an/the, collapse whitespace.
std::vector<std::string> NormalizeAnswer(const std::string& text);

// F1 over token multisets; both empty -> 1, exactly one empty -> 0.
double TokenF1(const std::vector<std::string>& pred,
               const std::vector<std::string>& gold);

// Unigram F1 / exact match over answer strings. With normalize=false the
// operands are split on whitespace verbatim.
double UnigramF1(const std::string& pred, const std::string& gold,
                 bool normalize = true);
int ExactMatch(const std::string& pred, const std::string& gold,
               bool normalize = true);

// Picks the intent label an LLM completion refers to: case-insensitive exact
// match first, then earliest substring occurrence (ties alphabetical).
// nullopt = unmatched, scored incorrect. Throws EmptyLabelSet.
std::optional<std::string> MatchIntent(const std::string& llm_output,
                                       const std::vector<std::string>& label_set);

}  // namespace wcnslu

#endif  // WCNSLU_METRICS_H_
