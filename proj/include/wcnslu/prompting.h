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

#ifndef WCNSLU_PROMPTING_H_
#define WCNSLU_PROMPTING_H_

#include <optional>
#include <string>
#include <vector>

#include "wcnslu/lattice.h"

namespace wcnslu {

// Which rendering of the spoken input goes into the prompt.
struct TranscriptSource {
  enum class Kind { kGroundTruth, kOneBest, kNBestOracle, kWcn };

  Kind kind = Kind::kOneBest;
  std::string separator = "|";  // Wcn only; "|" or "/"
  double threshold = 0.3;       // Wcn only; in [0,1]

  // Stable label used in records and report columns, e.g. "wcn|0.30".
  std::string Label() const;

  // Parses "ground_truth" / "1best" / "oracle" / "wcn"; wcn picks up the
  // given separator/threshold. Throws Error on unknown token.
  static TranscriptSource FromToken(const std::string& token,
                                    const std::string& separator, double threshold);

  bool operator==(const TranscriptSource&) const = default;
};

// Everything RenderTranscript may need about one example.
struct RenderableExample {
  std::string gold_text;
  const Lattice* lattice = nullptr;
  Scales scales;
  int nbest_k = 10;
};

// The pinned prompt wording. Main templates take {wcn_instruction},
// {example_block} and {context}/{question} or {labels}/{command}; the
// instruction template takes {separator}; example templates take
// {context}/{question}/{answer} or {command}/{intent}.
struct PromptTemplates {
  std::string sqa_task;
  std::string ic_task;
  std::string wcn_instruction;
  std::string sqa_example;
  std::string ic_example;

  static const PromptTemplates& Defaults();

  // Reads a template file: lines "@<section>" start a section, everything up
  // to the next marker is its content. Unknown sections are rejected.
  static PromptTemplates FromFile(const std::string& path);

  bool operator==(const PromptTemplates&) const = default;
};

struct PromptSpec {
  enum class Task { kSqa, kIc };

  struct InContextExample {
    std::string context;  // SQA only
    std::string input;    // rendered question / command transcript
    std::string gold;     // answer / intent label
  };

  Task task = Task::kSqa;
  std::string context;              // SQA
  std::vector<std::string> labels;  // IC; strictly sorted, unique
  bool wcn_instruction = false;
  std::string separator = "|";
  std::optional<InContextExample> in_context;
  std::string test_input;
};

// The fixed sentence explaining the separator; byte-identical across runs.
std::string WcnInstructionText(const std::string& separator);
std::string WcnInstructionText(const std::string& separator,
                               const PromptTemplates& templates);

// Renders the transcript of one example under a source. Throws
// MissingLattice / MissingReference when the source needs data the example
// does not carry.
std::string RenderTranscript(const RenderableExample& ex, const TranscriptSource& src);

// Deterministic prompt assembly; equal specs yield byte-equal prompts.
// Throws UnsortedLabels if IC labels are not strictly sorted.
std::string BuildPrompt(const PromptSpec& spec, const PromptTemplates& templates);

}  // namespace wcnslu

#endif  // WCNSLU_PROMPTING_H_
