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

#ifndef WCNSLU_HARNESS_H_
#define WCNSLU_HARNESS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wcnslu/lattice.h"
#include "wcnslu/llm_client.h"
#include "wcnslu/prompting.h"

namespace wcnslu {

enum class Task { kSqa, kIc };

struct SqaExample {
  std::string id;
  std::string context;
  std::string question_gold;
  std::vector<std::string> answers;  // at least one
  Lattice lattice;
};

struct IcExample {
  std::string id;
  std::string command_gold;
  std::string intent;
  Lattice lattice;
};

struct Dataset {
  Task task = Task::kSqa;
  std::vector<SqaExample> sqa;
  std::vector<IcExample> ic;
  std::vector<std::string> labels;  // IC label inventory, sorted, unique

  size_t size() const { return task == Task::kSqa ? sqa.size() : ic.size(); }
};

// Loads a JSON-lines dataset. Each line is one example:
//   SQA: {"id", "context", "question_gold", "answers": [...],
//         "lattice": "relative/path.slf"} (or "lattice_inline": "<SLF text>")
//   IC:  {"id", "command_gold", "intent", "lattice" | "lattice_inline"}
// Lattice paths are resolved relative to the dataset file. Referenced
// lattices are parsed eagerly; failures surface as LatticeError tagged with
// the example id. Schema violations throw SchemaError with the line number.
// For IC, labels_path (one label per line) pins the label inventory;
// without it the inventory is the sorted set of intents in the data.
Dataset LoadDataset(const std::string& path, Task task,
                    const std::string& labels_path = "");

struct EvalConfig {
  std::vector<TranscriptSource> sources;
  int shots = 0;  // 0 or 1

  enum class InstructionMode { kAuto, kOn, kOff };
  // kAuto follows the paper's rule: for WCN sources the instruction is always
  // included in one-shot runs and omitted zero-shot. Non-WCN sources never
  // carry it.
  InstructionMode wcn_instruction = InstructionMode::kAuto;

  // In-context examples normally use the same transcript source as the test
  // example; this override renders them with a different source instead.
  std::optional<TranscriptSource> icl_source_override;

  std::uint64_t seed = 0;
  Scales scales;
  int nbest_k = 10;
  int max_tokens = 64;
  double temperature = 0.0;
  std::string model_id = "mock";
  bool normalize_answers = true;  // SQuAD-style normalization for F1/EM
  int workers = 4;
  PromptTemplates templates = PromptTemplates::Defaults();
};

struct EvalRecord {
  std::string id;
  std::string source_label;
  int source_index = 0;
  std::string rendered_input;
  std::string prediction;
  std::optional<double> f1;              // SQA
  std::optional<double> em;              // SQA
  std::optional<bool> correct;           // IC
  std::optional<std::string> matched_intent;
  double question_wer = 0.0;
  std::optional<double> options_per_word;  // WCN sources only
  std::string prompt_digest;
  std::optional<std::string> error;  // set = example failed, run continued
};

struct SourceSummary {
  std::string source_label;
  int count = 0;
  int errored = 0;
  std::optional<double> mean_f1;
  std::optional<double> mean_em;
  std::optional<double> accuracy;
  double mean_question_wer = 0.0;
  std::optional<double> mean_options_per_word;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  int shots = 0;
  std::string model_id;
  std::string icl_example_id;  // empty in zero-shot runs
  std::vector<std::string> source_labels;
};

struct EvalRun {
  std::vector<EvalRecord> records;  // ordered by (id, source)
  std::vector<SourceSummary> summaries;
  RunMetadata metadata;
};

// Runs the (example x source) matrix against the backend. Per-example
// failures are recorded, not fatal; the record count is always
// |dataset| * |sources|. icl_pool supplies one-shot examples (defaults to the
// dataset itself).
EvalRun RunEval(const Dataset& dataset, CompletionBackend& backend,
                const EvalConfig& config, const Dataset* icl_pool = nullptr);

std::string RecordsToJsonl(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> RecordsFromJsonl(const std::string& text);
std::string SummaryToJson(const EvalRun& run);
std::string SummaryToCsv(const EvalRun& run);

// WER-bin report: the "0" bin holds exactly the WER-0 examples, then
// (0,e1], (e1,e2], ... with a final overflow bin, per source. The two-way
// split rows partition every record into wer=0 / wer>0.
struct WerBinRow {
  std::string source_label;
  std::string bin;
  int count = 0;
  std::optional<double> mean_f1;
  std::optional<double> mean_em;
  std::optional<double> accuracy;
  std::optional<double> mean_options_per_word;
};

struct BinReport {
  std::vector<WerBinRow> bins;
  std::vector<WerBinRow> split;
};

inline const std::vector<double>& DefaultBinEdges() {
  static const std::vector<double> kEdges = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  return kEdges;
}

BinReport WerBinReport(const std::vector<EvalRecord>& records,
                       const std::vector<double>& edges = DefaultBinEdges());

// Long-format CSV (source,bin,count,metric,value) ready for plotting.
std::string BinReportToCsv(const BinReport& report);
std::string BinReportToJson(const BinReport& report);

// Tool configuration, a JSON key-value document. Relative paths resolve
// against the config file's directory. The API credential is read from the
// environment variable named by api_key_env and never stored in files.
struct ToolConfig {
  std::string backend = "mock";  // mock | http | replay
  std::string base_url;
  std::string completions_path = "/chat/completions";
  std::string model_id = "mock";
  std::string api_key_env;
  int max_tokens = 64;
  double temperature = 0.0;
  double acoustic_scale = 1.0;
  double lm_scale = 1.0;
  int nbest_k = 10;
  std::string template_path;  // empty = built-in defaults
  std::string cache_path;     // empty = no persistent cache
  int in_flight = 4;
  int requests_per_minute = 0;
  int max_attempts = 3;
  int backoff_initial_ms = 100;
  int backoff_max_ms = 2000;
  std::string mock_responses_path;  // JSON: request digest -> completion
  std::string mock_default;
  bool normalize_answers = true;
};

ToolConfig LoadToolConfig(const std::string& path);

// Builds the configured backend chain (mock/http/replay behind the
// record/replay cache).
std::shared_ptr<CompletionBackend> MakeBackend(const ToolConfig& config);

}  // namespace wcnslu

#endif  // WCNSLU_HARNESS_H_
